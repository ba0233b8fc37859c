"""Nonverbal — how often each action accompanies the personality agent.

The selection frequency of an action in a (scenario, personality) cell is
the share of the personality agent's utterances that carry it.  With the
trial unit each trial's share is computed first and the shares are
averaged, so long trials do not dominate.  Every schema action appears in
the tables, unselected ones with frequency 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from nvpersona.behavior.schema import ActionSchema, Modality, load_schema
from nvpersona.errors import CorpusError, EmptyGroup
from nvpersona.linguistics.scoring import DocumentUnit
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind, Speaker
from nvpersona.simulation.experiment import Corpus

logger = logging.getLogger(__name__)

PERSONALITIES = (Personality.EXTROVERT, Personality.INTROVERT)
CSV_COLUMNS = (
    "action",
    "modality",
    "scenario",
    "personality",
    "frequency",
    "count",
    "n",
)


@dataclass(frozen=True)
class ActionFrequency:
    """Selection statistics of one action in one cell.

    Attributes:
        action: Canonical action name.
        modality: Its modality.
        count: Utterances carrying the action.
        n: Personality-agent utterances in the cell.
        frequency: Selection frequency in ``[0, 1]``.
    """

    action: str
    modality: Modality
    count: int
    n: int
    frequency: float

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "action": self.action,
            "modality": self.modality.value,
            "count": self.count,
            "n": self.n,
            "frequency": self.frequency,
        }


@dataclass
class Distribution:
    """Action frequencies of one (scenario, personality) cell.

    Attributes:
        scenario: Scenario kind.
        personality: Personality of the agent.
        utterances: Personality-agent utterances counted.
        trials: Trials contributing utterances.
        actions: Frequencies keyed by action name, schema order.
    """

    scenario: ScenarioKind
    personality: Personality
    utterances: int
    trials: int
    actions: dict[str, ActionFrequency] = field(default_factory=dict)

    def frequency(self, action: str) -> float:
        """Selection frequency of ``action``."""
        return self.actions[action].frequency

    def by_modality(self, modality: Modality) -> list[ActionFrequency]:
        """Frequencies of one modality, schema order."""
        return [a for a in self.actions.values() if a.modality is modality]

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "scenario": self.scenario.value,
            "personality": self.personality.value,
            "utterances": self.utterances,
            "trials": self.trials,
            "actions": [a.to_dict() for a in self.actions.values()],
        }


@dataclass(frozen=True)
class PolarityContrast:
    """Extrovert-leaning minus introvert-leaning member of an intensity pair.

    Attributes:
        scenario: Scenario kind.
        extrovert_action: Extrovert-leaning member (``Gesture Widely``).
        introvert_action: Introvert-leaning member (``Gesture Narrowly``).
        lean_extrovert: Frequency difference for the extrovert agent.
        lean_introvert: Frequency difference for the introvert agent.
    """

    scenario: ScenarioKind
    extrovert_action: str
    introvert_action: str
    lean_extrovert: float
    lean_introvert: float

    @property
    def difference(self) -> float:
        """Positive when the extrovert agent leans further extrovert."""
        return self.lean_extrovert - self.lean_introvert

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "scenario": self.scenario.value,
            "extrovert_action": self.extrovert_action,
            "introvert_action": self.introvert_action,
            "lean_extrovert": self.lean_extrovert,
            "lean_introvert": self.lean_introvert,
            "difference": self.difference,
        }


@dataclass
class NonverbalSection:
    """Distributions and contrasts for every scenario."""

    unit: str
    distributions: list[Distribution]
    contrasts: list[PolarityContrast]

    def cell(self, scenario: ScenarioKind, personality: Personality) -> Distribution:
        """Distribution of one cell.

        Raises:
            KeyError: If the cell was not analysed.
        """
        for dist in self.distributions:
            if dist.scenario is scenario and dist.personality is personality:
                return dist
        raise KeyError(f"{scenario.value}/{personality.value}")

    def csv_rows(self) -> list[tuple[Any, ...]]:
        """Plot-ready rows matching :data:`CSV_COLUMNS`."""
        return [
            (
                a.action,
                a.modality.value,
                dist.scenario.value,
                dist.personality.value,
                a.frequency,
                a.count,
                a.n,
            )
            for dist in self.distributions
            for a in dist.actions.values()
        ]

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "unit": self.unit,
            "distributions": [d.to_dict() for d in self.distributions],
            "contrasts": [c.to_dict() for c in self.contrasts],
        }


def _distribution(
    corpus: Corpus,
    scenario: ScenarioKind,
    personality: Personality,
    schema: ActionSchema,
    unit: DocumentUnit,
) -> Distribution:
    cell = [
        (trial.trial_id, trial.utterances_of(Speaker.PERSONALITY.value))
        for trial in corpus.cell(scenario, personality)
    ]
    cell = [(tid, utterances) for tid, utterances in cell if utterances]
    per_trial = [utterances for _, utterances in cell]
    n = sum(len(utterances) for utterances in per_trial)
    if n == 0:
        raise EmptyGroup(f"{scenario.value}/{personality.value}")

    # rows: trials, columns: schema actions
    names = schema.names()
    column = {name: i for i, name in enumerate(names)}
    hits = np.zeros((len(per_trial), len(names)), dtype=int)
    for row, (trial_id, utterances) in enumerate(cell):
        for utterance in utterances:
            for action in utterance.actions:
                if action not in column:
                    msg = (
                        f"{trial_id} turn {utterance.turn_index}: "
                        f"action {action!r} is not in the schema"
                    )
                    raise CorpusError(msg)
                hits[row, column[action]] += 1
    sizes = np.array([len(u) for u in per_trial], dtype=float)
    counts = hits.sum(axis=0)
    if unit is DocumentUnit.TRIAL:
        frequencies = (hits / sizes[:, None]).mean(axis=0)
    else:
        frequencies = counts / n

    return Distribution(
        scenario=scenario,
        personality=personality,
        utterances=n,
        trials=len(per_trial),
        actions={
            name: ActionFrequency(
                action=name,
                modality=schema.get(name).modality,
                count=int(counts[i]),
                n=n,
                frequency=float(frequencies[i]),
            )
            for i, name in enumerate(names)
        },
    )


def analyze_nonverbal(
    corpus: Corpus,
    schema: ActionSchema | None = None,
    unit: DocumentUnit = DocumentUnit.UTTERANCE,
) -> NonverbalSection:
    """Selection frequencies and polarity contrasts per scenario.

    Raises:
        EmptyGroup: If a (scenario, personality) cell has no
            personality-agent utterances.
        CorpusError: If an utterance carries an action the schema lacks.
    """
    schema = schema or load_schema()
    distributions = []
    contrasts = []
    for scenario in corpus.scenarios():
        cells = {
            p: _distribution(corpus, scenario, p, schema, unit) for p in PERSONALITIES
        }
        distributions.extend(cells.values())
        for ext_action, int_action in schema.polarity_pairs():
            leans = [
                cells[p].frequency(ext_action) - cells[p].frequency(int_action)
                for p in PERSONALITIES
            ]
            contrasts.append(
                PolarityContrast(scenario, ext_action, int_action, leans[0], leans[1])
            )
        logger.debug(
            "%s: %d + %d utterances",
            scenario.value,
            cells[Personality.EXTROVERT].utterances,
            cells[Personality.INTROVERT].utterances,
        )
    return NonverbalSection(unit.value, distributions, contrasts)
