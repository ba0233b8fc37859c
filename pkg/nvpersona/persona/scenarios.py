"""Scenarios — the two agent-to-agent conversation settings.

*Negotiation* is a buyer-seller conflict: a misunderstanding led the
buyer to post a negative review; the buyer wants a refund and the seller
wants the review removed.  The personality agent plays the buyer.

*Ice-breaking* is a non-confrontational get-to-know-you exchange: the
generic agent opens and asks three personal questions, the personality
agent answers.

A turn is one utterance, so the caps are 10 utterances for negotiation
and 8 for ice-breaking, both agents counted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

from nvpersona.errors import ConfigError


class ScenarioKind(Enum):
    """Conversation setting."""

    NEGOTIATION = "negotiation"
    ICE_BREAKING = "icebreaking"

    @property
    def title(self) -> str:
        """Display name used in report headings."""
        return {"negotiation": "Negotiation", "icebreaking": "Ice-breaking"}[
            self.value
        ]


class Speaker(Enum):
    """Which agent of a pair is speaking."""

    PERSONALITY = "personality"
    GENERIC = "generic"

    @property
    def other(self) -> Speaker:
        """The interlocutor."""
        if self is Speaker.PERSONALITY:
            return Speaker.GENERIC
        return Speaker.PERSONALITY


TURN_CAPS: dict[ScenarioKind, int] = {
    ScenarioKind.NEGOTIATION: 10,
    ScenarioKind.ICE_BREAKING: 8,
}
ICE_BREAKING_QUESTION_COUNT = 3
DEFAULT_TRIALS = 10
DEFAULT_TERMINATOR = "<END>"

# Placeholder questions of the usual ice-breaking genre; replace them in
# the config file to use a published question set.
DEFAULT_QUESTIONS: tuple[str, ...] = (
    "What is a hobby or interest you have picked up recently?",
    "If you could spend a week anywhere in the world, where would you go and why?",
    "What is a small thing that made you happy this week?",
)


@dataclass(frozen=True)
class RoleSpec:
    """One side of a scenario.

    Attributes:
        name: Short role name used in the prompt (``"the buyer"``).
        brief: Instructions specific to this role.
    """

    name: str
    brief: str


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully specified conversation setting.

    Attributes:
        kind: Negotiation or ice-breaking.
        narrative: Situation shared by both agents.
        personality_role: Role played by the personality agent.
        generic_role: Role played by the generic agent.
        opening_speaker: Agent that speaks first.
        max_turns: Utterance cap, both agents counted.
        fixed_questions: Questions asked verbatim, in order, by the
            questioner (ice-breaking only).
        questioner: Agent asking ``fixed_questions``.
        trials: Trials per personality.
        terminator: Literal token an agent emits to end the dialogue.
    """

    kind: ScenarioKind
    narrative: str
    personality_role: RoleSpec
    generic_role: RoleSpec
    opening_speaker: Speaker
    max_turns: int
    fixed_questions: tuple[str, ...] = ()
    questioner: Speaker = Speaker.GENERIC
    trials: int = DEFAULT_TRIALS
    terminator: str = DEFAULT_TERMINATOR

    def __post_init__(self) -> None:
        """Check the per-kind invariants."""
        cap = TURN_CAPS[self.kind]
        if self.max_turns != cap:
            msg = f"{self.kind.value} is capped at {cap} turns, got {self.max_turns}"
            raise ConfigError(msg)
        if self.trials < 1:
            msg = f"trials must be >= 1, got {self.trials}"
            raise ConfigError(msg)
        if self.kind is ScenarioKind.ICE_BREAKING:
            if len(self.fixed_questions) != ICE_BREAKING_QUESTION_COUNT:
                msg = (
                    f"ice-breaking needs {ICE_BREAKING_QUESTION_COUNT} questions, "
                    f"got {len(self.fixed_questions)}"
                )
                raise ConfigError(msg)
            if any(not q.strip() for q in self.fixed_questions):
                msg = "ice-breaking questions must be non-empty"
                raise ConfigError(msg)
        elif self.fixed_questions:
            msg = "only ice-breaking scenarios take fixed questions"
            raise ConfigError(msg)

    def role_of(self, speaker: Speaker) -> RoleSpec:
        """Return the role played by ``speaker``."""
        if speaker is Speaker.PERSONALITY:
            return self.personality_role
        return self.generic_role

    def swapped(self) -> ScenarioConfig:
        """Return the scenario with the two agents' roles exchanged."""
        return replace(
            self,
            personality_role=self.generic_role,
            generic_role=self.personality_role,
            opening_speaker=self.opening_speaker.other,
            questioner=self.questioner.other,
        )

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form, used for the run manifest and config hash."""
        return {
            "kind": self.kind.value,
            "narrative": self.narrative,
            "personality_role": {
                "name": self.personality_role.name,
                "brief": self.personality_role.brief,
            },
            "generic_role": {
                "name": self.generic_role.name,
                "brief": self.generic_role.brief,
            },
            "opening_speaker": self.opening_speaker.value,
            "max_turns": self.max_turns,
            "fixed_questions": list(self.fixed_questions),
            "questioner": self.questioner.value,
            "trials": self.trials,
            "terminator": self.terminator,
        }


def _negotiation(trials: int) -> ScenarioConfig:
    return ScenarioConfig(
        kind=ScenarioKind.NEGOTIATION,
        narrative=(
            "A customer ordered a product from a small online shop. Because of a "
            "misunderstanding about the order, the customer was unhappy and left a "
            "negative review on the shop's page. The buyer and the seller are now "
            "talking to settle the dispute."
        ),
        personality_role=RoleSpec(
            name="the buyer",
            brief=(
                "You are the buyer. You want a refund for your order. You wrote the "
                "negative review and will only consider removing it if the seller "
                "treats you fairly."
            ),
        ),
        generic_role=RoleSpec(
            name="the seller",
            brief=(
                "You are the seller. You want the buyer to remove the negative "
                "review. You would rather not give a full refund, but you are open "
                "to a reasonable compromise."
            ),
        ),
        opening_speaker=Speaker.PERSONALITY,
        max_turns=TURN_CAPS[ScenarioKind.NEGOTIATION],
        trials=trials,
    )


def _ice_breaking(trials: int, questions: tuple[str, ...]) -> ScenarioConfig:
    return ScenarioConfig(
        kind=ScenarioKind.ICE_BREAKING,
        narrative=(
            "Two people who have never met are getting to know each other through "
            "a few personal questions in a relaxed, friendly conversation."
        ),
        personality_role=RoleSpec(
            name="the interviewee",
            brief=(
                "You are the interviewee. Answer the other person's questions about "
                "yourself."
            ),
        ),
        generic_role=RoleSpec(
            name="the interviewer",
            brief=(
                "You are the interviewer. You ask the other person a few personal "
                "questions, one per turn, and close the conversation warmly after "
                "the last answer."
            ),
        ),
        opening_speaker=Speaker.GENERIC,
        max_turns=TURN_CAPS[ScenarioKind.ICE_BREAKING],
        fixed_questions=questions,
        questioner=Speaker.GENERIC,
        trials=trials,
    )


def default_scenarios(
    trials: int = DEFAULT_TRIALS,
    questions: tuple[str, ...] = DEFAULT_QUESTIONS,
) -> dict[ScenarioKind, ScenarioConfig]:
    """Return the negotiation and ice-breaking scenarios.

    Args:
        trials: Trials per personality for both scenarios.
        questions: The three ice-breaking questions.

    Returns:
        Both scenarios keyed by kind, negotiation first.
    """
    return {
        ScenarioKind.NEGOTIATION: _negotiation(trials),
        ScenarioKind.ICE_BREAKING: _ice_breaking(trials, tuple(questions)),
    }


def _role_from_dict(data: dict[str, Any] | None, base: RoleSpec) -> RoleSpec:
    data = data or {}
    return RoleSpec(
        name=data.get("name", base.name),
        brief=data.get("brief", base.brief),
    )


def scenarios_from_dict(
    data: dict[str, Any] | None,
    trials: int = DEFAULT_TRIALS,
) -> dict[ScenarioKind, ScenarioConfig]:
    """Overlay the config file's ``scenarios`` mapping onto the defaults.

    Args:
        data: Mapping keyed by scenario value; each entry may set
            ``narrative``, ``personality_role``/``generic_role``
            (``name``, ``brief``), ``questions`` and ``terminator``.
        trials: Trials per personality, applied to every scenario.

    Returns:
        Both scenarios keyed by kind.

    Raises:
        ConfigError: On unknown scenario keys or broken invariants.
    """
    data = data or {}
    questions = tuple(
        (data.get(ScenarioKind.ICE_BREAKING.value) or {}).get(
            "questions", DEFAULT_QUESTIONS
        )
    )
    scenarios = default_scenarios(trials=trials, questions=questions)
    for key, override in data.items():
        try:
            kind = ScenarioKind(key)
        except ValueError:
            msg = f"unknown scenario {key!r}"
            raise ConfigError(msg) from None
        override = override or {}
        base = scenarios[kind]
        scenarios[kind] = replace(
            base,
            narrative=override.get("narrative", base.narrative),
            personality_role=_role_from_dict(
                override.get("personality_role"), base.personality_role
            ),
            generic_role=_role_from_dict(
                override.get("generic_role"), base.generic_role
            ),
            terminator=override.get("terminator", base.terminator),
        )
    return scenarios
