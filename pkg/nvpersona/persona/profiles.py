"""Profiles — personality conditioning text for each agent type.

Only extraversion is manipulated.  The personality agent is either an
Extrovert or an Introvert; its interlocutor is a Generic agent without
any trait definition.  Default wording is assembled from well-known
behavioral markers of extraversion (expressive faces, eye contact,
wide/fast gestures, forward lean, loud/fast speech) and their introvert
counterparts.  Every string can be overridden from the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from nvpersona.behavior.schema import Modality
from nvpersona.errors import ConfigError


class Personality(Enum):
    """Agent personality label."""

    EXTROVERT = "extrovert"
    INTROVERT = "introvert"
    GENERIC = "generic"

    @property
    def short(self) -> str:
        """Three-letter table heading (``EXT``, ``INT``, ``GEN``)."""
        return self.value[:3].upper()


@dataclass(frozen=True)
class PersonalityProfile:
    """Trait conditioning for one agent type.

    Attributes:
        label: Which personality this profile realizes.
        trait_definition: Paragraph defining the trait; empty for Generic.
        behavioral_guidance: Per-modality hints on nonverbal expression.
    """

    label: Personality
    trait_definition: str = ""
    behavioral_guidance: dict[Modality, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Enforce the Generic-is-traitless contract."""
        if self.label is Personality.GENERIC:
            if self.trait_definition.strip() or self.behavioral_guidance:
                msg = "the generic profile must not carry trait text"
                raise ConfigError(msg)
        elif not self.trait_definition.strip():
            msg = f"{self.label.value} profile needs a trait definition"
            raise ConfigError(msg)

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form, used for the run manifest and config hash."""
        return {
            "label": self.label.value,
            "trait_definition": self.trait_definition,
            "behavioral_guidance": {
                m.value: self.behavioral_guidance[m]
                for m in Modality
                if m in self.behavioral_guidance
            },
        }


_EXTROVERT_TRAIT = (
    "You are a highly extroverted person. You are outgoing, talkative, "
    "energetic and assertive. You enjoy social interaction, speak up readily, "
    "share your feelings openly and actively engage the other person."
)
_INTROVERT_TRAIT = (
    "You are a highly introverted person. You are reserved, quiet, reflective "
    "and restrained. You prefer listening to talking, keep your answers "
    "measured and share your feelings cautiously."
)

_EXTROVERT_GUIDANCE = {
    Modality.FACE: (
        "Show dynamic, pronounced facial expressions and maintain eye contact."
    ),
    Modality.BODY: (
        "Use wide and fast gestures and lean forward to show engagement."
    ),
    Modality.VOICE: "Speak loudly and at a fast pace.",
}
_INTROVERT_GUIDANCE = {
    Modality.FACE: (
        "Keep facial expressions subtle and restrained and tend to look away."
    ),
    Modality.BODY: (
        "Use narrow and slow gestures and lean backward to keep your distance."
    ),
    Modality.VOICE: "Speak softly and at a slow pace.",
}


def default_profiles() -> dict[Personality, PersonalityProfile]:
    """Return the built-in Extrovert, Introvert and Generic profiles."""
    return {
        Personality.EXTROVERT: PersonalityProfile(
            label=Personality.EXTROVERT,
            trait_definition=_EXTROVERT_TRAIT,
            behavioral_guidance=dict(_EXTROVERT_GUIDANCE),
        ),
        Personality.INTROVERT: PersonalityProfile(
            label=Personality.INTROVERT,
            trait_definition=_INTROVERT_TRAIT,
            behavioral_guidance=dict(_INTROVERT_GUIDANCE),
        ),
        Personality.GENERIC: PersonalityProfile(label=Personality.GENERIC),
    }


def profiles_from_dict(
    data: dict[str, Any] | None,
) -> dict[Personality, PersonalityProfile]:
    """Overlay config-file persona overrides onto the defaults.

    Args:
        data: The ``personas`` mapping of the config file, keyed by
            personality value, each with optional ``trait_definition`` and
            ``behavioral_guidance`` (keyed by modality value).

    Returns:
        Profiles for all three personalities.

    Raises:
        ConfigError: On unknown personality or modality keys.
    """
    profiles = default_profiles()
    for key, override in (data or {}).items():
        try:
            label = Personality(key)
        except ValueError:
            msg = f"unknown persona {key!r}"
            raise ConfigError(msg) from None
        base = profiles[label]
        guidance = dict(base.behavioral_guidance)
        for mod_key, hint in (override.get("behavioral_guidance") or {}).items():
            try:
                guidance[Modality(mod_key)] = hint
            except ValueError:
                msg = f"unknown modality {mod_key!r} in persona {key!r}"
                raise ConfigError(msg) from None
        profiles[label] = PersonalityProfile(
            label=label,
            trait_definition=override.get("trait_definition", base.trait_definition),
            behavioral_guidance=guidance,
        )
    return profiles
