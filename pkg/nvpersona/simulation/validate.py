"""Validate — check a run directory against the corpus invariants.

Problems are collected, not raised, so one pass reports everything wrong
with a corpus.  Only an unreadable manifest aborts the check.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from nvpersona.behavior.schema import ActionSchema, Modality, load_schema
from nvpersona.errors import CorpusError, InvariantViolation, SchemaError
from nvpersona.persona.scenarios import TURN_CAPS, ScenarioKind, Speaker
from nvpersona.simulation.experiment import RunManifest
from nvpersona.simulation.transcript import Trial, TrialStatus, read_records

logger = logging.getLogger(__name__)

_SPEAKERS = {s.value for s in Speaker}


def _check_actions(
    trial_id: str,
    turn: int,
    actions: Any,
    schema: ActionSchema,
) -> list[InvariantViolation]:
    where = f"turn {turn}"
    if not isinstance(actions, dict):
        return [InvariantViolation(trial_id, "actions", f"{where}: not an object")]
    problems = []
    names = []
    for modality in Modality:
        listed = actions.get(modality.value, [])
        if not isinstance(listed, list):
            problems.append(
                InvariantViolation(
                    trial_id, "actions", f"{where}: {modality.value} is not a list"
                )
            )
            continue
        for name in listed:
            if name not in schema:
                problems.append(
                    InvariantViolation(
                        trial_id, "unknown-action", f"{where}: {name!r}"
                    )
                )
                continue
            if schema.get(name).modality is not modality:
                problems.append(
                    InvariantViolation(
                        trial_id,
                        "modality",
                        f"{where}: {name} listed under {modality.value}",
                    )
                )
            names.append(name)
    try:
        schema.check_exclusions(names)
    except SchemaError as exc:
        problems.append(InvariantViolation(trial_id, "exclusion", f"{where}: {exc}"))
    return problems


def _check_questions(
    trial_id: str,
    records: list[dict[str, Any]],
    questions: list[str],
    questioner: str,
) -> list[InvariantViolation]:
    asked = [
        i
        for r in records
        if r.get("speaker") == questioner
        for i, q in enumerate(questions)
        if q in str(r.get("text", ""))
    ]
    if asked != list(range(len(questions))):
        return [
            InvariantViolation(
                trial_id,
                "fixed-questions",
                f"questions asked in order {asked}, expected each once in order",
            )
        ]
    return []


def _check_trial(
    trial: Trial,
    entry: dict[str, Any],
    records: list[dict[str, Any]],
    scenario: dict[str, Any],
    schema: ActionSchema,
) -> list[InvariantViolation]:
    tid = trial.trial_id
    problems = []
    cap = TURN_CAPS[trial.scenario]
    if len(records) > cap:
        problems.append(
            InvariantViolation(tid, "turn-cap", f"{len(records)} utterances > {cap}")
        )
    if entry.get("utterances") != len(records):
        problems.append(
            InvariantViolation(
                tid,
                "utterance-count",
                f"manifest says {entry.get('utterances')}, "
                f"transcript has {len(records)}",
            )
        )

    opener = scenario.get("opening_speaker")
    for position, record in enumerate(records):
        if record.get("trial_id") != tid:
            problems.append(
                InvariantViolation(
                    tid, "trial-id", f"line {position + 1}: {record.get('trial_id')!r}"
                )
            )
        if record.get("turn_index") != position:
            problems.append(
                InvariantViolation(
                    tid,
                    "turn-order",
                    f"line {position + 1} has turn_index {record.get('turn_index')!r}",
                )
            )
        speaker = record.get("speaker")
        if speaker not in _SPEAKERS:
            problems.append(
                InvariantViolation(tid, "speaker", f"turn {position}: {speaker!r}")
            )
        elif opener in _SPEAKERS:
            expected = opener if position % 2 == 0 else Speaker(opener).other.value
            if speaker != expected:
                problems.append(
                    InvariantViolation(
                        tid,
                        "alternation",
                        f"turn {position} spoken by {speaker}, expected {expected}",
                    )
                )
        if not str(record.get("text", "")).strip():
            problems.append(InvariantViolation(tid, "empty-text", f"turn {position}"))
        problems.extend(_check_actions(tid, position, record.get("actions"), schema))

    questions = list(scenario.get("fixed_questions", []))
    if (
        trial.scenario is ScenarioKind.ICE_BREAKING
        and trial.status is TrialStatus.COMPLETED
        and questions
    ):
        questioner = scenario.get("questioner", Speaker.GENERIC.value)
        problems.extend(_check_questions(tid, records, questions, questioner))
    return problems


def validate_corpus(
    run_dir: str | Path, schema: ActionSchema | None = None
) -> list[InvariantViolation]:
    """Check every transcript of a run directory.

    Args:
        run_dir: The run directory.
        schema: Action schema (defaults to the shared one).

    Returns:
        All violations found, in trial order; empty for a clean corpus.

    Raises:
        ManifestError: If the manifest itself cannot be read.
    """
    run_dir = Path(run_dir)
    schema = schema or load_schema()
    manifest = RunManifest.load(run_dir)
    scenarios = manifest.hash_inputs.get("scenarios", {})
    problems: list[InvariantViolation] = []

    on_disk = {p.stem for p in (run_dir / "trials").glob("*.jsonl")}
    for stem in sorted(on_disk - set(manifest.trials)):
        problems.append(
            InvariantViolation(stem, "unlisted-transcript", "not in the manifest")
        )

    for trial_id in sorted(manifest.trials):
        entry = manifest.trials[trial_id]
        try:
            trial = Trial.from_manifest_entry(trial_id, entry)
        except CorpusError as exc:
            problems.append(InvariantViolation(trial_id, "manifest-entry", str(exc)))
            continue
        path = run_dir / trial.file_name
        if not path.exists():
            if trial.status is not TrialStatus.PENDING:
                problems.append(
                    InvariantViolation(trial_id, "missing-transcript", str(path))
                )
            continue
        try:
            records = read_records(path)
        except CorpusError as exc:
            problems.append(
                InvariantViolation(trial_id, "unreadable-transcript", str(exc))
            )
            continue
        problems.extend(
            _check_trial(
                trial, entry, records, scenarios.get(trial.scenario.value, {}), schema
            )
        )

    logger.info(
        "validated %d trials in %s: %d problems",
        len(manifest.trials),
        run_dir,
        len(problems),
    )
    return problems
