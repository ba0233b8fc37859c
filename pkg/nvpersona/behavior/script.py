"""Script — utterance-level behavior scripts.

Behaviors are realized per utterance, not per word: every selected action
starts together with the utterance (or, with the immediate anchor, as soon
as the player receives the script).  The script only fixes a
deterministic event order (face, body, voice; table order within each
modality) so downstream players receive identical input for identical
utterances.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from nvpersona.behavior.markup import AnnotatedUtterance
from nvpersona.behavior.schema import ActionSchema, Modality, load_schema


class Anchor(Enum):
    """When an event starts relative to its utterance.

    Attributes:
        UTTERANCE: With the first word of the utterance.
        IMMEDIATE: On receipt of the script, before speech starts.
    """

    UTTERANCE = "utterance"
    IMMEDIATE = "immediate"


@dataclass(frozen=True)
class BehaviorEvent:
    """A single scheduled action.

    Attributes:
        modality: Channel the action plays on.
        action: Canonical action name.
        start: Start anchor.
    """

    modality: Modality
    action: str
    start: Anchor = Anchor.UTTERANCE


@dataclass(frozen=True)
class BehaviorScript:
    """Ordered events for one utterance.

    Attributes:
        speaker: Speaker of the referenced utterance.
        turn_index: Turn index of the referenced utterance.
        text: Text the events accompany.
        events: Events in playback order.
    """

    speaker: str
    turn_index: int
    text: str
    events: tuple[BehaviorEvent, ...]

    def to_dict(self) -> dict[str, object]:
        """Plain-data form for JSON export."""
        return {
            "speaker": self.speaker,
            "turn_index": self.turn_index,
            "text": self.text,
            "events": [
                {
                    "modality": e.modality.label,
                    "action": e.action,
                    "start": e.start.value,
                }
                for e in self.events
            ],
        }


def compile_behavior_script(
    utterance: AnnotatedUtterance,
    schema: ActionSchema | None = None,
    *,
    start: Anchor = Anchor.UTTERANCE,
) -> BehaviorScript:
    """Compile an utterance's actions into an ordered event list.

    Args:
        utterance: A validated annotated utterance.
        schema: Action schema (defaults to the shared one).
        start: Anchor shared by every event.

    Returns:
        The behavior script; empty ``events`` when no action was selected.

    Raises:
        UnknownAction: If the utterance names an action outside the schema.
        ExclusionViolation: If the utterance breaks an exclusion group.
    """
    schema = schema or load_schema()
    schema.check_exclusions(utterance.actions)
    events = tuple(
        BehaviorEvent(modality=schema.get(name).modality, action=name, start=start)
        for name in schema.sort(utterance.actions)
    )
    return BehaviorScript(
        speaker=utterance.speaker,
        turn_index=utterance.turn_index,
        text=utterance.text,
        events=events,
    )
