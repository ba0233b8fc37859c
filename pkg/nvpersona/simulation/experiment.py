"""Experiment — run every trial of a study into a resumable run directory.

Layout of a run directory (named ``<UTC timestamp>-<config hash>``)::

    manifest.json          run metadata and per-trial status
    trials/<trial_id>.jsonl  one transcript per trial

The manifest is rewritten atomically after every finished trial, so an
interrupted run is always a valid partial corpus.  ``--resume`` reruns
exactly the trials that are not completed with their transcript present,
and refuses to continue a run whose configuration hash differs.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from nvpersona.behavior.schema import load_schema
from nvpersona.errors import CorpusError, ManifestError
from nvpersona.fileio import write_json_atomic
from nvpersona.llm.backends import build_backend
from nvpersona.llm.gateway import Backend, Gateway
from nvpersona.persona.catalog import load_catalog
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioConfig, ScenarioKind
from nvpersona.simulation.config import (
    TURN_UNIT,
    RunConfig,
    config_hash,
    file_digest,
)
from nvpersona.simulation.engine import TrialSettings, run_trial, utc_now
from nvpersona.simulation.transcript import (
    TranscriptWriter,
    Trial,
    TrialStatus,
    read_records,
    trial_id_for,
    utterance_from_record,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_KIND = "nvpersona.run_manifest"
MANIFEST_SCHEMA_VERSION = 1


def trial_seed(
    root_seed: int, scenario: ScenarioKind, personality: Personality, index: int
) -> int:
    """Derive an independent 32-bit seed for one trial from the run seed."""
    scenario_index = list(ScenarioKind).index(scenario)
    personality_index = list(Personality).index(personality)
    sequence = np.random.SeedSequence(
        [root_seed, scenario_index, personality_index, index]
    )
    return int(sequence.generate_state(1)[0])


@dataclass(frozen=True)
class PlannedTrial:
    """One cell of the trial grid."""

    scenario: ScenarioConfig
    personality: Personality
    index: int
    trial_id: str
    seed: int


def plan_trials(config: RunConfig) -> list[PlannedTrial]:
    """Every (scenario, personality, index) the run must produce."""
    plan = []
    scenarios = config.effective_scenarios()
    for kind in config.only_scenarios:
        scenario = scenarios[kind]
        for personality in config.only_personalities:
            for index in range(scenario.trials):
                plan.append(
                    PlannedTrial(
                        scenario=scenario,
                        personality=personality,
                        index=index,
                        trial_id=trial_id_for(kind, personality, index),
                        seed=trial_seed(config.seed, kind, personality, index),
                    )
                )
    return plan


@dataclass
class RunManifest:
    """Contents of ``manifest.json``.

    Attributes:
        config_hash: Short hash of ``hash_inputs``.
        hash_inputs: Everything shaping prompts, scenarios and schema.
        config: Full run configuration.
        trials: Per-trial metadata keyed by trial id.
        created: Creation time, ``None`` when not recorded.
    """

    config_hash: str
    hash_inputs: dict[str, Any]
    config: dict[str, Any]
    trials: dict[str, dict[str, Any]] = field(default_factory=dict)
    created: str | None = None

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form written to disk."""
        return {
            "kind": MANIFEST_KIND,
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "turn_unit": TURN_UNIT,
            "config_hash": self.config_hash,
            "hash_inputs": self.hash_inputs,
            "config": self.config,
            "created": self.created,
            "trials": self.trials,
        }

    def save(self, run_dir: Path) -> None:
        """Atomically (re)write the manifest."""
        write_json_atomic(run_dir / MANIFEST_NAME, self.to_dict())

    @classmethod
    def load(cls, run_dir: str | Path) -> RunManifest:
        """Read and sanity-check ``run_dir/manifest.json``.

        Raises:
            ManifestError: If the manifest is missing, unreadable, of the
                wrong kind or version, or its hash does not match.
        """
        path = Path(run_dir) / MANIFEST_NAME
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            msg = f"{path} not found; is {run_dir} a run directory?"
            raise ManifestError(msg) from None
        except json.JSONDecodeError as exc:
            msg = f"{path} is not valid JSON: {exc}"
            raise ManifestError(msg) from exc
        if not isinstance(data, dict) or data.get("kind") != MANIFEST_KIND:
            msg = f"{path} is not an nvpersona run manifest"
            raise ManifestError(msg)
        if data.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            msg = (
                f"{path}: unsupported manifest version "
                f"{data.get('schema_version')!r}"
            )
            raise ManifestError(msg)
        try:
            manifest = cls(
                config_hash=str(data["config_hash"]),
                hash_inputs=dict(data["hash_inputs"]),
                config=dict(data["config"]),
                trials=dict(data["trials"]),
                created=data.get("created"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            msg = f"{path} is missing {exc}"
            raise ManifestError(msg) from exc
        if config_hash(manifest.hash_inputs) != manifest.config_hash:
            msg = f"{path}: config_hash does not match the recorded inputs"
            raise ManifestError(msg)
        return manifest


@dataclass
class Corpus:
    """Trials of one run directory.

    Attributes:
        run_dir: Where the run lives.
        manifest: Its manifest.
        trials: Trials with transcripts, sorted by id.
    """

    run_dir: Path
    manifest: RunManifest
    trials: list[Trial] = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        """The run's configuration hash."""
        return self.manifest.config_hash

    def completed(self) -> list[Trial]:
        """Trials that ran to the end."""
        return [t for t in self.trials if t.status is TrialStatus.COMPLETED]

    def cell(self, scenario: ScenarioKind, personality: Personality) -> list[Trial]:
        """Completed trials of one (scenario, personality) cell."""
        return [
            t
            for t in self.completed()
            if t.scenario is scenario and t.personality is personality
        ]

    def scenarios(self) -> list[ScenarioKind]:
        """Scenario kinds present, in enum order."""
        present = {t.scenario for t in self.trials}
        return [k for k in ScenarioKind if k in present]

    def fixed_questions(self, kind: ScenarioKind) -> tuple[str, ...]:
        """The fixed questions recorded for ``kind`` (empty if none)."""
        scenario = self.manifest.hash_inputs.get("scenarios", {}).get(kind.value, {})
        return tuple(scenario.get("fixed_questions", ()))

    def __iter__(self) -> Iterator[Trial]:
        return iter(self.trials)


def load_corpus(run_dir: str | Path) -> Corpus:
    """Read a run directory.

    Trials still pending without a transcript are skipped; every other
    manifest entry must have its transcript.

    Raises:
        ManifestError: On an unreadable manifest, a missing transcript or
            a transcript the manifest does not list.
        CorpusError: On malformed transcript records.
    """
    run_dir = Path(run_dir)
    manifest = RunManifest.load(run_dir)
    listed = set(manifest.trials)
    on_disk = {p.stem for p in (run_dir / "trials").glob("*.jsonl")}
    unlisted = sorted(on_disk - listed)
    if unlisted:
        msg = f"transcripts not listed in the manifest: {', '.join(unlisted)}"
        raise ManifestError(msg)

    trials = []
    for trial_id in sorted(manifest.trials):
        entry = manifest.trials[trial_id]
        trial = Trial.from_manifest_entry(trial_id, entry)
        path = run_dir / trial.file_name
        if not path.exists():
            if trial.status is TrialStatus.PENDING:
                continue
            msg = (
                f"manifest lists {trial_id} as {trial.status.value} "
                f"but {path} is missing"
            )
            raise ManifestError(msg)
        try:
            trial.utterances = [utterance_from_record(r) for r in read_records(path)]
        except CorpusError as exc:
            msg = f"{path}: {exc}"
            raise CorpusError(msg) from exc
        trials.append(trial)
    return Corpus(run_dir=run_dir, manifest=manifest, trials=trials)


def _run_dir_name(chash: str) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return f"{stamp}-{chash}"


def run_experiment(
    config: RunConfig,
    backend: Backend | None = None,
    *,
    out_dir: str | Path = "runs",
    run_dir: str | Path | None = None,
    resume: bool = False,
) -> Corpus:
    """Run (or finish) every trial of the study.

    Args:
        config: Run configuration.
        backend: Completion backend; built from ``config.backend`` if
            omitted.
        out_dir: Parent folder of new run directories.
        run_dir: Exact run directory to create (new runs) or continue
            (``resume``).  Defaults to ``out_dir/<timestamp>-<hash>``.
        resume: Continue an existing run directory.

    Returns:
        The corpus on disk after the run.

    Raises:
        CatalogIncomplete: If the description catalog misses actions.
        ManifestError: On resume with a different configuration hash, or
            when creating a run directory that already exists.
        AuthMissing: If the HTTP backend has no API key.
    """
    schema = load_schema()
    catalog, _ = load_catalog(config.catalog_path)
    catalog.require_complete(schema)
    hash_inputs = config.hash_inputs(file_digest(config.catalog_path))
    chash = config_hash(hash_inputs)

    if resume:
        if run_dir is None:
            msg = "resume needs the run directory"
            raise ManifestError(msg)
        run_dir = Path(run_dir)
        manifest = RunManifest.load(run_dir)
        if manifest.config_hash != chash:
            msg = (
                f"{run_dir} was produced with config {manifest.config_hash}, "
                f"the current config is {chash}; refusing to mix corpora"
            )
            raise ManifestError(msg)
    else:
        run_dir = Path(run_dir) if run_dir else Path(out_dir) / _run_dir_name(chash)
        if (run_dir / MANIFEST_NAME).exists():
            msg = f"{run_dir} already holds a run; use --resume to continue it"
            raise ManifestError(msg)
        manifest = RunManifest(
            config_hash=chash,
            hash_inputs=hash_inputs,
            config=config.to_dict(),
            created=utc_now() if config.stamps_time else None,
        )
    (run_dir / "trials").mkdir(parents=True, exist_ok=True)

    plan = plan_trials(config)
    todo = []
    for planned in plan:
        entry = manifest.trials.get(planned.trial_id)
        done = (
            entry is not None
            and entry.get("status") == TrialStatus.COMPLETED.value
            and (run_dir / "trials" / f"{planned.trial_id}.jsonl").exists()
        )
        if not done:
            todo.append(planned)
            manifest.trials[planned.trial_id] = Trial(
                trial_id=planned.trial_id,
                scenario=planned.scenario.kind,
                personality=planned.personality,
                index=planned.index,
                seed=planned.seed,
            ).to_manifest_entry()
    manifest.save(run_dir)
    logger.info(
        "run %s: %d trials planned, %d to run (%d jobs)",
        run_dir,
        len(plan),
        len(todo),
        config.jobs,
    )

    owns_backend = backend is None
    backend = backend or build_backend(config.backend)
    gateway = Gateway(backend, max_concurrency=config.backend.max_concurrency)
    settings = TrialSettings(
        catalog=catalog,
        schema=schema,
        profiles=config.profiles,
        payload_format=config.payload_format,
        annotate_generic=config.annotate_generic,
        lenient=config.lenient,
        max_consecutive_failures=config.max_consecutive_failures,
        model=config.backend.model,
        temperature=config.backend.temperature,
        clock=utc_now if config.stamps_time else None,
    )

    def _run_one(planned: PlannedTrial) -> Trial:
        path = run_dir / "trials" / f"{planned.trial_id}.jsonl"
        with TranscriptWriter(path, schema) as writer:
            return run_trial(
                planned.scenario,
                planned.personality,
                gateway,
                planned.seed,
                settings=settings,
                trial_id=planned.trial_id,
                index=planned.index,
                writer=writer,
            )

    try:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures: dict[Future[Trial], PlannedTrial] = {
                pool.submit(_run_one, planned): planned for planned in todo
            }
            try:
                for future in as_completed(futures):
                    trial = future.result()
                    manifest.trials[trial.trial_id] = trial.to_manifest_entry()
                    manifest.save(run_dir)
            except BaseException:
                pool.shutdown(wait=True, cancel_futures=True)
                raise
    finally:
        if owns_backend and hasattr(backend, "close"):
            backend.close()

    corpus = load_corpus(run_dir)
    failed = [t.trial_id for t in corpus.trials if t.status is TrialStatus.FAILED]
    if failed:
        logger.warning("%d trials failed: %s", len(failed), ", ".join(failed))
    logger.info("run %s finished: %d completed", run_dir, len(corpus.completed()))
    return corpus
