"""Markup — parse and serialize annotated utterances.

An LLM turn arrives either as a StructuredJson object::

    {"text": "Hi!", "face": ["Smile Broadly"], "body": [], "voice": ["Loud Volume"]}

or as free text with parenthesized InlineTags::

    Sure, that works. (Nod) (Slow Pace)

StructuredJson is the canonical contract (see ``config/utterance.schema.json``);
InlineTags is the fallback for free-form outputs.  Both produce the same
``AnnotatedUtterance``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any

import jsonschema

from nvpersona.behavior.schema import ActionSchema, Modality, load_schema
from nvpersona.errors import EmptyText, MalformedPayload, UnknownAction

logger = logging.getLogger(__name__)

UTTERANCE_SCHEMA_FILE = (
    Path(__file__).resolve().parent.parent.parent / "config" / "utterance.schema.json"
)

_TAG_RE = re.compile(r"\(([^()]*)\)")
_FENCE_RE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)
# A parenthesized group is treated as a tag (not prose) when it is a short
# run of letters and spaces.
_TAG_SHAPE_RE = re.compile(r"^\s*[A-Za-z]+(?:\s+[A-Za-z]+){0,3}\s*$")
_SPACE_BEFORE_PUNCT_RE = re.compile(r"\s+([,.;:!?])")


class PayloadFormat(Enum):
    """Wire syntax of an LLM turn."""

    STRUCTURED_JSON = "json"
    INLINE_TAGS = "tags"


@dataclass(frozen=True)
class AnnotatedUtterance:
    """One speaker turn with its selected nonverbal actions.

    Attributes:
        speaker: Agent id (``"personality"`` or ``"generic"``).
        text: Clean utterance text, tags removed.
        actions: Canonical action names selected for this turn.
        turn_index: 0-based position in the dialogue.
        raw: Verbatim LLM payload, kept for audit.
        unknown_tags: Tags that matched no action (lenient mode only).
    """

    speaker: str
    text: str
    actions: frozenset[str] = frozenset()
    turn_index: int = 0
    raw: str = field(default="", compare=False)
    unknown_tags: tuple[str, ...] = field(default=(), compare=False)

    def by_modality(
        self, schema: ActionSchema | None = None
    ) -> dict[Modality, list[str]]:
        """Split the actions per modality, each list in schema order."""
        schema = schema or load_schema()
        grouped: dict[Modality, list[str]] = {m: [] for m in Modality}
        for name in schema.sort(self.actions):
            grouped[schema.get(name).modality].append(name)
        return grouped

    def actions_record(
        self, schema: ActionSchema | None = None
    ) -> dict[str, list[str]]:
        """Return ``{"face": [...], "body": [...], "voice": [...]}``."""
        return {m.value: names for m, names in self.by_modality(schema).items()}


@lru_cache(maxsize=1)
def _utterance_validator() -> jsonschema.protocols.Validator:
    with UTTERANCE_SCHEMA_FILE.open("r", encoding="utf-8") as f:
        schema = json.load(f)
    validator_cls = jsonschema.validators.validator_for(schema)
    validator_cls.check_schema(schema)
    return validator_cls(schema)


def _extract_json_object(raw: str) -> dict[str, Any]:
    """Find the JSON object in ``raw``, tolerating fences and prose around it."""
    text = raw.strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if data is None:
        fenced = _FENCE_RE.search(text)
        if fenced:
            try:
                data = json.loads(fenced.group(1))
            except json.JSONDecodeError:
                data = None
    if data is None:
        decoder = json.JSONDecoder()
        for start in (i for i, ch in enumerate(text) if ch == "{"):
            try:
                data, _ = decoder.raw_decode(text, start)
                break
            except json.JSONDecodeError:
                continue
    if not isinstance(data, dict):
        msg = "no JSON object found in payload"
        raise MalformedPayload(msg)
    return data


def _parse_structured(
    raw: str, schema: ActionSchema, *, lenient: bool
) -> tuple[str, set[str], list[str]]:
    data = _extract_json_object(raw)
    errors = sorted(_utterance_validator().iter_errors(data), key=str)
    if errors:
        msg = f"payload violates utterance schema: {errors[0].message}"
        raise MalformedPayload(msg)

    actions: set[str] = set()
    unknown: list[str] = []
    for modality in Modality:
        for label in data.get(modality.value, []):
            name = schema.resolve(label)
            if name is None:
                if not lenient:
                    raise UnknownAction(label)
                logger.warning("dropping unknown action %r", label)
                unknown.append(label)
                continue
            listed_under = schema.get(name).modality
            if listed_under is not modality:
                if not lenient:
                    msg = (
                        f"{name} is a {listed_under.value} action "
                        f"but was listed under {modality.value}"
                    )
                    raise MalformedPayload(msg)
                logger.warning(
                    "%s listed under %s, accepting as %s",
                    name,
                    modality.value,
                    listed_under.value,
                )
            actions.add(name)
    return data["text"].strip(), actions, unknown


def _parse_inline(
    raw: str, schema: ActionSchema, *, lenient: bool
) -> tuple[str, set[str], list[str]]:
    actions: set[str] = set()
    unknown: list[str] = []

    def _strip(match: re.Match[str]) -> str:
        content = match.group(1)
        name = schema.resolve(content)
        if name is not None:
            actions.add(name)
            return " "
        if not _TAG_SHAPE_RE.match(content):
            return match.group(0)  # prose parenthetical
        words = content.split()
        if not all(w[0].isupper() for w in words):
            return match.group(0)
        if not lenient:
            raise UnknownAction(content.strip())
        logger.warning("dropping unknown tag (%s)", content.strip())
        unknown.append(content.strip())
        return " "

    stripped = _TAG_RE.sub(_strip, raw)
    text = " ".join(stripped.split())
    text = _SPACE_BEFORE_PUNCT_RE.sub(r"\1", text)
    return text, actions, unknown


def parse_annotated(
    raw_payload: str,
    fmt: PayloadFormat = PayloadFormat.STRUCTURED_JSON,
    *,
    speaker: str = "",
    turn_index: int = 0,
    schema: ActionSchema | None = None,
    lenient: bool = False,
) -> AnnotatedUtterance:
    """Parse one LLM turn into an annotated utterance.

    Args:
        raw_payload: The verbatim model output.
        fmt: Syntax to read the payload as.
        speaker: Agent id recorded on the utterance.
        turn_index: Dialogue position recorded on the utterance.
        schema: Action schema (defaults to the shared one).
        lenient: Downgrade unknown actions to warnings.  Unknown tags are
            then kept only in ``raw`` and listed in ``unknown_tags``.

    Returns:
        The validated utterance.

    Raises:
        MalformedPayload: Empty payload or unreadable JSON.
        UnknownAction: A tag names no schema action (strict mode).
        ExclusionViolation: Two actions of one exclusion group co-occur.
        EmptyText: Nothing but tags in the payload.
    """
    if not raw_payload or not raw_payload.strip():
        msg = "empty payload"
        raise MalformedPayload(msg)
    schema = schema or load_schema()

    match fmt:
        case PayloadFormat.STRUCTURED_JSON:
            text, actions, unknown = _parse_structured(
                raw_payload, schema, lenient=lenient
            )
        case PayloadFormat.INLINE_TAGS:
            text, actions, unknown = _parse_inline(
                raw_payload, schema, lenient=lenient
            )

    schema.check_exclusions(actions)
    if not text:
        msg = "utterance text is empty after tag stripping"
        raise EmptyText(msg)
    return AnnotatedUtterance(
        speaker=speaker,
        text=text,
        actions=frozenset(actions),
        turn_index=turn_index,
        raw=raw_payload,
        unknown_tags=tuple(unknown),
    )


def serialize_annotated(
    utterance: AnnotatedUtterance,
    fmt: PayloadFormat = PayloadFormat.STRUCTURED_JSON,
    schema: ActionSchema | None = None,
) -> str:
    """Render an utterance back into a payload ``parse_annotated`` accepts.

    Args:
        utterance: The utterance to render.
        fmt: Target syntax.
        schema: Action schema (defaults to the shared one).

    Returns:
        Canonical payload text (sorted actions, compact JSON).
    """
    schema = schema or load_schema()
    match fmt:
        case PayloadFormat.STRUCTURED_JSON:
            record = {"text": utterance.text, **utterance.actions_record(schema)}
            return json.dumps(record, ensure_ascii=False)
        case PayloadFormat.INLINE_TAGS:
            tags = " ".join(f"({name})" for name in schema.sort(utterance.actions))
            return f"{utterance.text} {tags}".rstrip()
