"""Transcript — trial records and their line-delimited JSON files.

Each trial is stored as ``trials/<trial_id>.jsonl`` with one record per
utterance, written and flushed as soon as the turn is accepted::

    {"actions": {"body": [], "face": ["Smile Broadly"], "voice": []},
     "origin": "model", "raw": "...", "speaker": "personality",
     "text": "...", "trial_id": "negotiation-extrovert-00", "turn_index": 0}

``origin`` is ``"engine"`` for turns the engine writes itself (the fixed
ice-breaking questions) and ``"model"`` otherwise.  Trial metadata lives
in the run manifest, see :mod:`nvpersona.simulation.experiment`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import TracebackType
from typing import Any, TextIO

from nvpersona.behavior.markup import AnnotatedUtterance
from nvpersona.behavior.schema import ActionSchema, Modality, load_schema
from nvpersona.errors import CorpusError
from nvpersona.fileio import jsonl_line
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind

ENGINE_ORIGIN = "engine"
MODEL_ORIGIN = "model"


class TrialStatus(Enum):
    """Outcome of one trial."""

    PENDING = "pending"
    COMPLETED = "completed"
    FAILED = "failed"


def trial_id_for(scenario: ScenarioKind, personality: Personality, index: int) -> str:
    """Stable identifier, e.g. ``negotiation-extrovert-03``."""
    return f"{scenario.value}-{personality.value}-{index:02d}"


@dataclass
class TurnError:
    """A turn the engine had to discard.

    Attributes:
        turn_index: Dialogue position the turn was meant for.
        speaker: Agent that produced it.
        error: Exception class and message.
        raw: Payload as received (empty for transport failures).
    """

    turn_index: int
    speaker: str
    error: str
    raw: str = ""

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for the manifest."""
        return {
            "turn_index": self.turn_index,
            "speaker": self.speaker,
            "error": self.error,
            "raw": self.raw,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TurnError:
        """Inverse of ``to_dict``."""
        return cls(
            turn_index=int(data["turn_index"]),
            speaker=str(data["speaker"]),
            error=str(data["error"]),
            raw=str(data.get("raw", "")),
        )


@dataclass
class Trial:
    """One simulated dialogue.

    Attributes:
        trial_id: Stable identifier (also the transcript file stem).
        scenario: Conversation setting.
        personality: Personality of the conditioned agent.
        index: Trial number within its (scenario, personality) cell.
        seed: Seed derived for this trial.
        utterances: Accepted turns in order.
        status: Completed, failed or still pending.
        backend: Descriptor of the backend that produced the turns.
        started: ISO-8601 start time, ``None`` when not recorded.
        ended: ISO-8601 end time, ``None`` when not recorded.
        errors: Discarded turns.
        failure: Why the trial failed, if it did.
    """

    trial_id: str
    scenario: ScenarioKind
    personality: Personality
    index: int
    seed: int
    utterances: list[AnnotatedUtterance] = field(default_factory=list)
    status: TrialStatus = TrialStatus.PENDING
    backend: str = ""
    started: str | None = None
    ended: str | None = None
    errors: list[TurnError] = field(default_factory=list)
    failure: str | None = None

    @property
    def file_name(self) -> str:
        """Transcript path relative to the run directory."""
        return f"trials/{self.trial_id}.jsonl"

    def utterances_of(self, speaker: str) -> list[AnnotatedUtterance]:
        """Turns spoken by ``speaker``."""
        return [u for u in self.utterances if u.speaker == speaker]

    def to_manifest_entry(self) -> dict[str, Any]:
        """Metadata recorded for this trial in the run manifest."""
        return {
            "scenario": self.scenario.value,
            "personality": self.personality.value,
            "index": self.index,
            "seed": self.seed,
            "status": self.status.value,
            "utterances": len(self.utterances),
            "backend": self.backend,
            "started": self.started,
            "ended": self.ended,
            "errors": [e.to_dict() for e in self.errors],
            "failure": self.failure,
            "file": self.file_name,
        }

    @classmethod
    def from_manifest_entry(cls, trial_id: str, entry: dict[str, Any]) -> Trial:
        """Rebuild the metadata part of a trial (without utterances).

        Raises:
            CorpusError: If the entry is missing fields or has bad values.
        """
        try:
            return cls(
                trial_id=trial_id,
                scenario=ScenarioKind(entry["scenario"]),
                personality=Personality(entry["personality"]),
                index=int(entry["index"]),
                seed=int(entry["seed"]),
                status=TrialStatus(entry["status"]),
                backend=str(entry.get("backend", "")),
                started=entry.get("started"),
                ended=entry.get("ended"),
                errors=[TurnError.from_dict(e) for e in entry.get("errors", [])],
                failure=entry.get("failure"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            msg = f"manifest entry for {trial_id} is malformed: {exc}"
            raise CorpusError(msg) from exc


def utterance_to_record(
    trial_id: str,
    utterance: AnnotatedUtterance,
    schema: ActionSchema | None = None,
    *,
    origin: str = MODEL_ORIGIN,
) -> dict[str, Any]:
    """Transcript record of one utterance."""
    return {
        "trial_id": trial_id,
        "turn_index": utterance.turn_index,
        "speaker": utterance.speaker,
        "text": utterance.text,
        "actions": utterance.actions_record(schema),
        "raw": utterance.raw,
        "origin": origin,
    }


def utterance_from_record(record: dict[str, Any]) -> AnnotatedUtterance:
    """Rebuild an utterance from its transcript record.

    Action names are taken as recorded; checking them against the schema
    is :func:`nvpersona.simulation.validate.validate_corpus`'s job.

    Raises:
        CorpusError: If a required field is missing or mistyped.
    """
    try:
        actions = record["actions"]
        names = [n for m in Modality for n in actions.get(m.value, [])]
        return AnnotatedUtterance(
            speaker=str(record["speaker"]),
            text=str(record["text"]),
            actions=frozenset(names),
            turn_index=int(record["turn_index"]),
            raw=str(record.get("raw", "")),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        msg = f"malformed transcript record: {exc}"
        raise CorpusError(msg) from exc


def read_records(path: str | Path) -> list[dict[str, Any]]:
    """Read every record of a transcript file.

    Raises:
        CorpusError: On a line that is not a JSON object.
    """
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                msg = f"{path}:{lineno}: {exc}"
                raise CorpusError(msg) from exc
            if not isinstance(record, dict):
                msg = f"{path}:{lineno}: record is not an object"
                raise CorpusError(msg)
            records.append(record)
    return records


class TranscriptWriter:
    """Append utterance records to a trial file, one flushed line per turn.

    Use as a context manager; the file is truncated on open so a re-run
    trial never inherits lines from an interrupted attempt.
    """

    def __init__(self, path: str | Path, schema: ActionSchema | None = None) -> None:
        self.path = Path(path)
        self.schema = schema or load_schema()
        self._file: TextIO | None = None

    def __enter__(self) -> TranscriptWriter:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", encoding="utf-8", newline="\n")
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def write(
        self,
        trial_id: str,
        utterance: AnnotatedUtterance,
        *,
        origin: str = MODEL_ORIGIN,
    ) -> None:
        """Persist one accepted turn."""
        if self._file is None:
            msg = "TranscriptWriter used outside its context"
            raise RuntimeError(msg)
        record = utterance_to_record(trial_id, utterance, self.schema, origin=origin)
        self._file.write(jsonl_line(record))
        self._file.flush()
        os.fsync(self._file.fileno())
