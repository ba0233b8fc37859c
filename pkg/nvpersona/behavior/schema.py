"""Schema — the canonical 29-entry nonverbal action vocabulary.

Actions are grouped into three modalities (face, body, voice).  Ten of
them come in intensity/direction pairs whose members lean towards
opposite ends of the extraversion axis (e.g. *Coy Smile* vs. *Smile
Broadly*); the rest are neutral social-feedback cues.  Some actions are
mutually exclusive within one utterance (an agent cannot look away and
hold eye contact, or speak loudly and softly, at the same time).

The table is compiled in; ``load_schema()`` validates it once and hands
out a shared immutable instance.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from nvpersona.errors import ExclusionViolation, UnknownAction


class Modality(Enum):
    """Channel an action is expressed through.  Order is the script order."""

    FACE = "face"
    BODY = "body"
    VOICE = "voice"

    @property
    def label(self) -> str:
        """Capitalised display name (``Face``, ``Body``, ``Voice``)."""
        return self.value.capitalize()


class Polarity(Enum):
    """Which end of the extraversion axis an action leans towards."""

    EXTROVERT = "extrovert"
    INTROVERT = "introvert"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class NonverbalAction:
    """One entry of the action list.

    Attributes:
        name: Canonical label, e.g. ``"Smile Broadly"``.
        modality: Face, body or voice.
        polarity: Extraversion leaning.
        intensity_pair: Name of the opposite-intensity counterpart.
        exclusion_group: Actions sharing a group never co-occur in one
            utterance.
    """

    name: str
    modality: Modality
    polarity: Polarity = Polarity.NEUTRAL
    intensity_pair: str | None = None
    exclusion_group: str | None = None


# (introvert-leaning, extrovert-leaning, modality, exclusion group)
_PAIRS: tuple[tuple[str, str, Modality, str | None], ...] = (
    ("Avert Gaze", "Make Eye Contact", Modality.FACE, "gaze"),
    ("Coy Smile", "Smile Broadly", Modality.FACE, None),
    ("Subtle Sadness", "Intense Sadness", Modality.FACE, None),
    ("Mild Anger", "Strong Anger", Modality.FACE, None),
    ("Soft Surprise", "Extreme Surprise", Modality.FACE, None),
    ("Gesture Narrowly", "Gesture Widely", Modality.BODY, None),
    ("Gesture Slowly", "Gesture Fastly", Modality.BODY, None),
    ("Lean Backward", "Lean Forward", Modality.BODY, None),
    ("Small Volume", "Loud Volume", Modality.VOICE, "volume"),
    ("Slow Pace", "Fast Pace", Modality.VOICE, "pace"),
)

# Table order within each modality; drives deterministic script ordering.
_TABLE_ORDER: dict[Modality, tuple[str, ...]] = {
    Modality.FACE: (
        "Avert Gaze",
        "Make Eye Contact",
        "Coy Smile",
        "Smile Broadly",
        "Subtle Sadness",
        "Intense Sadness",
        "Mild Anger",
        "Strong Anger",
        "Soft Surprise",
        "Extreme Surprise",
        "Static Eyebrows",
        "Raise Eyebrows",
        "Narrow Eyes",
    ),
    Modality.BODY: (
        "Nod",
        "Shaking",
        "Disagree",
        "Agree",
        "Gesture Narrowly",
        "Gesture Widely",
        "Gesture Slowly",
        "Gesture Fastly",
        "Give Thumbs Up",
        "Head Tilting",
        "Lean Forward",
        "Lean Backward",
    ),
    Modality.VOICE: (
        "Loud Volume",
        "Small Volume",
        "Fast Pace",
        "Slow Pace",
    ),
}

# Phrasings used in the behavioral literature that map onto table entries.
_ALIASES: dict[str, str] = {
    "eye contact": "Make Eye Contact",
    "gaze aversion": "Avert Gaze",
    "wide gesture": "Gesture Widely",
    "narrow gesture": "Gesture Narrowly",
    "fast gesture": "Gesture Fastly",
    "slow gesture": "Gesture Slowly",
    "gesture fast": "Gesture Fastly",
    "gesture slow": "Gesture Slowly",
    "shake": "Shaking",
    "head shake": "Shaking",
    "thumbs up": "Give Thumbs Up",
    "head tilt": "Head Tilting",
}

EXPECTED_COUNTS: dict[Modality, int] = {
    Modality.FACE: 13,
    Modality.BODY: 12,
    Modality.VOICE: 4,
}


def normalize_name(name: str) -> str:
    """Case-fold and collapse internal whitespace for tag matching."""
    return " ".join(name.split()).casefold()


@dataclass(frozen=True)
class ActionSchema:
    """Immutable, queryable view of the action list.

    Attributes:
        actions: All actions in table order (face, body, voice).
    """

    actions: tuple[NonverbalAction, ...]
    _by_name: dict[str, NonverbalAction] = field(
        init=False, repr=False, compare=False
    )
    _lookup: dict[str, str] = field(init=False, repr=False, compare=False)
    _order: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Build name, alias and ordering indexes."""
        by_name = {a.name: a for a in self.actions}
        lookup = {normalize_name(a.name): a.name for a in self.actions}
        for alias, target in _ALIASES.items():
            if target in by_name:
                lookup.setdefault(alias, target)
        modality_rank = {m: i for i, m in enumerate(Modality)}
        ordered = sorted(
            enumerate(self.actions),
            key=lambda ia: (modality_rank[ia[1].modality], ia[0]),
        )
        order = {a.name: rank for rank, (_, a) in enumerate(ordered)}
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_lookup", lookup)
        object.__setattr__(self, "_order", order)

    def __len__(self) -> int:
        return len(self.actions)

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and name in self._by_name

    def names(self) -> list[str]:
        """Return all canonical names in schema order."""
        return [a.name for a in self.actions]

    def get(self, name: str) -> NonverbalAction:
        """Return the action with canonical ``name``.

        Raises:
            UnknownAction: If no such action exists.
        """
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownAction(name) from None

    def resolve(self, tag: str) -> str | None:
        """Map a free-form label to its canonical name, or ``None``."""
        return self._lookup.get(normalize_name(tag))

    def by_modality(self, modality: Modality) -> list[NonverbalAction]:
        """Return the actions of one modality in table order."""
        return [a for a in self.actions if a.modality is modality]

    def count_by_modality(self) -> dict[Modality, int]:
        """Return the number of actions per modality."""
        return {m: len(self.by_modality(m)) for m in Modality}

    def pair_of(self, name: str) -> str | None:
        """Return the opposite-intensity counterpart of ``name``."""
        return self.get(name).intensity_pair

    def exclusion_group(self, name: str) -> str | None:
        """Return the exclusion group of ``name`` (``None`` if ungrouped)."""
        return self.get(name).exclusion_group

    def polarity_pairs(self) -> list[tuple[str, str]]:
        """Return ``(extrovert_leaning, introvert_leaning)`` pairs in order."""
        pairs = []
        for action in self.actions:
            if action.polarity is Polarity.EXTROVERT and action.intensity_pair:
                pairs.append((action.name, action.intensity_pair))
        return pairs

    def order_key(self, name: str) -> int:
        """Sort key placing face before body before voice, then table order."""
        try:
            return self._order[name]
        except KeyError:
            raise UnknownAction(name) from None

    def sort(self, names: Iterable[str]) -> list[str]:
        """Return ``names`` in deterministic schema order."""
        return sorted(names, key=self.order_key)

    def check_exclusions(self, names: Iterable[str]) -> None:
        """Raise if two of ``names`` share an exclusion group.

        Raises:
            UnknownAction: If a name is not in the schema.
            ExclusionViolation: On the first group with two members.
        """
        groups: dict[str, list[str]] = {}
        for name in self.sort(set(names)):
            group = self.get(name).exclusion_group
            if group is not None:
                groups.setdefault(group, []).append(name)
        for group, members in groups.items():
            if len(members) > 1:
                raise ExclusionViolation(group, members)


def _build_actions() -> tuple[NonverbalAction, ...]:
    """Assemble the table from the pair list and the neutral remainder."""
    meta: dict[str, tuple[Polarity, str | None, str | None]] = {}
    for introvert, extrovert, _, group in _PAIRS:
        meta[introvert] = (Polarity.INTROVERT, extrovert, group)
        meta[extrovert] = (Polarity.EXTROVERT, introvert, group)
    actions = []
    for modality, names in _TABLE_ORDER.items():
        for name in names:
            polarity, pair, group = meta.get(name, (Polarity.NEUTRAL, None, None))
            actions.append(
                NonverbalAction(
                    name=name,
                    modality=modality,
                    polarity=polarity,
                    intensity_pair=pair,
                    exclusion_group=group,
                )
            )
    return tuple(actions)


def _check_integrity(schema: ActionSchema) -> None:
    """Fail loudly if the compiled-in table is inconsistent."""
    counts = schema.count_by_modality()
    if counts != EXPECTED_COUNTS:
        msg = f"embedded action table is corrupt: counts {counts}"
        raise RuntimeError(msg)
    for action in schema.actions:
        if action.intensity_pair is None:
            continue
        partner = schema.get(action.intensity_pair)
        if partner.intensity_pair != action.name:
            msg = f"asymmetric intensity pair: {action.name} / {partner.name}"
            raise RuntimeError(msg)
        if {action.polarity, partner.polarity} != {
            Polarity.EXTROVERT,
            Polarity.INTROVERT,
        }:
            msg = f"pair {action.name} / {partner.name} lacks opposite polarity"
            raise RuntimeError(msg)
    for action in schema.by_modality(Modality.VOICE):
        if action.exclusion_group is None:
            msg = f"voice action {action.name} has no exclusion group"
            raise RuntimeError(msg)


@lru_cache(maxsize=1)
def load_schema() -> ActionSchema:
    """Return the shared, validated 29-action schema.

    Returns:
        The immutable action schema.

    Raises:
        RuntimeError: If the embedded table is corrupt (a defect, never
            a user error).
    """
    schema = ActionSchema(actions=_build_actions())
    _check_integrity(schema)
    return schema
