"""Tests for nvpersona.behavior.script — per-utterance behavior scripts."""

import pytest

from nvpersona.behavior.markup import AnnotatedUtterance
from nvpersona.behavior.schema import Modality
from nvpersona.behavior.script import Anchor, compile_behavior_script
from nvpersona.errors import ExclusionViolation


class TestBehaviorScript:
    """Tests for compile_behavior_script."""

    def test_event_order(self) -> None:
        u = AnnotatedUtterance(
            speaker="personality",
            text="Great!",
            actions=frozenset({"Fast Pace", "Nod", "Smile Broadly", "Lean Forward"}),
            turn_index=4,
        )
        script = compile_behavior_script(u)
        assert [e.action for e in script.events] == [
            "Smile Broadly",
            "Nod",
            "Lean Forward",
            "Fast Pace",
        ]
        assert [e.modality for e in script.events] == [
            Modality.FACE,
            Modality.BODY,
            Modality.BODY,
            Modality.VOICE,
        ]
        assert all(e.start is Anchor.UTTERANCE for e in script.events)
        assert script.turn_index == 4
        assert script.text == "Great!"

    def test_no_actions(self) -> None:
        u = AnnotatedUtterance(speaker="generic", text="Okay.")
        assert compile_behavior_script(u).events == ()

    def test_immediate_anchor(self) -> None:
        u = AnnotatedUtterance(
            speaker="personality",
            text="Oh!",
            actions=frozenset({"Extreme Surprise", "Lean Backward"}),
        )
        script = compile_behavior_script(u, start=Anchor.IMMEDIATE)
        assert [e.start for e in script.events] == [Anchor.IMMEDIATE] * 2
        assert script.to_dict()["events"][0]["start"] == "immediate"

    def test_deterministic(self) -> None:
        actions = frozenset({"Coy Smile", "Slow Pace", "Gesture Narrowly"})
        a = AnnotatedUtterance(speaker="personality", text="Hm.", actions=actions)
        b = AnnotatedUtterance(speaker="personality", text="Hm.", actions=actions)
        assert compile_behavior_script(a) == compile_behavior_script(b)

    def test_exclusion_violation(self) -> None:
        u = AnnotatedUtterance(
            speaker="personality",
            text="Hm.",
            actions=frozenset({"Fast Pace", "Slow Pace"}),
        )
        with pytest.raises(ExclusionViolation):
            compile_behavior_script(u)

    def test_to_dict(self) -> None:
        u = AnnotatedUtterance(
            speaker="personality", text="Yes.", actions=frozenset({"Nod"})
        )
        assert compile_behavior_script(u).to_dict() == {
            "speaker": "personality",
            "turn_index": 0,
            "text": "Yes.",
            "events": [{"modality": "Body", "action": "Nod", "start": "utterance"}],
        }
