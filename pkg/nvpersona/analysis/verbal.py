"""Verbal — lexical comparison of extroverted and introverted utterances.

For every scenario the personality agent's utterances are scored with the
lexicon, grouped by personality and compared feature by feature with a
two-sample t-test (extrovert as the first sample).  The headline table
keeps features passing the significance filter; the full table keeps
every lexicon category.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from nvpersona.errors import ConfigError, DegenerateSamples, EmptyGroup
from nvpersona.linguistics.lexicon import Lexicon
from nvpersona.linguistics.scoring import Document, GroupScores, score_corpus
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind, Speaker
from nvpersona.simulation.config import AnalysisOptions
from nvpersona.simulation.experiment import Corpus
from nvpersona.stats.filtering import (
    EXT_GREATER,
    EXT_LESS,
    direction_of,
    significance_filter,
)
from nvpersona.stats.ttest import TTestResult, student_t_test, welch_t_test

logger = logging.getLogger(__name__)

COUNT_FEATURES = {"word_count": "Word count", "sentence_count": "Sentence count"}
PERSONALITIES = (Personality.EXTROVERT, Personality.INTROVERT)


@dataclass(frozen=True)
class ExpectedDirections:
    """Expected EXT-vs-INT direction per category id.

    Attributes:
        directions: ``EXT>INT`` or ``EXT<INT`` per category id.
        sources: Literature supporting each expectation.
    """

    directions: dict[str, str] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=dict)

    def verdict(self, feature: str, observed: str) -> str:
        """``Y`` if ``observed`` matches, ``N`` if not, ``-`` if unknown."""
        expected = self.directions.get(feature)
        if expected is None or observed not in (EXT_GREATER, EXT_LESS):
            return "-"
        return "Y" if observed == expected else "N"


def load_expected_directions(path: str | Path) -> ExpectedDirections:
    """Read the expected-direction map.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: On an unknown direction label.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        data: dict[str, Any] = yaml.safe_load(f) or {}
    directions, sources = {}, {}
    for cat_id, entry in (data.get("directions") or {}).items():
        if isinstance(entry, str):
            entry = {"expected": entry}
        expected = str(entry.get("expected", "")).replace(" ", "")
        if expected not in (EXT_GREATER, EXT_LESS):
            msg = f"{path}: {cat_id}: expected must be EXT>INT or EXT<INT"
            raise ConfigError(msg)
        directions[str(cat_id)] = expected
        sources[str(cat_id)] = str(entry.get("source", ""))
    return ExpectedDirections(directions, sources)


@dataclass
class FeatureRow:
    """One compared feature.

    Attributes:
        feature: Category id, ``word_count`` or ``sentence_count``.
        label: Display label.
        mean_ext: Extrovert mean.
        mean_int: Introvert mean.
        result: t-test, ``None`` for degenerate samples.
        direction: ``EXT>INT``, ``EXT<INT`` or ``EXT=INT``.
        aligned: ``Y``, ``N`` or ``-``.
        selected: Whether the feature passed the filter.
    """

    feature: str
    label: str
    mean_ext: float
    mean_int: float
    result: TTestResult | None
    direction: str
    aligned: str = "-"
    selected: bool = False

    @property
    def p(self) -> float | None:
        """Two-sided p-value, if the test was defined."""
        return None if self.result is None else self.result.p_two_sided

    @property
    def d(self) -> float:
        """Cohen's d; signed infinity for degenerate samples."""
        if self.result is not None:
            return self.result.cohens_d
        return float("inf") if self.mean_ext > self.mean_int else float("-inf")

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "feature": self.feature,
            "label": self.label,
            "mean_ext": self.mean_ext,
            "mean_int": self.mean_int,
            "test": None if self.result is None else self.result.to_dict(),
            "direction": self.direction,
            "aligned": self.aligned,
            "selected": self.selected,
        }


@dataclass
class ScenarioVerbal:
    """Verbal comparison for one scenario.

    Attributes:
        scenario: The scenario.
        documents: Scored documents per personality.
        excluded: Documents without tokens per personality.
        counts: Word and sentence count rows.
        features: Every lexicon category, lexicon order.
        selected: Categories passing the filter, strongest effect first.
    """

    scenario: ScenarioKind
    documents: dict[Personality, int]
    excluded: dict[Personality, int]
    counts: list[FeatureRow]
    features: list[FeatureRow]
    selected: list[FeatureRow]

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "scenario": self.scenario.value,
            "documents": {p.value: n for p, n in self.documents.items()},
            "excluded": {p.value: n for p, n in self.excluded.items()},
            "counts": [r.to_dict() for r in self.counts],
            "features": [r.to_dict() for r in self.features],
            "selected": [r.feature for r in self.selected],
        }


@dataclass
class VerbalSection:
    """Verbal results across scenarios."""

    unit: str
    test: str
    alpha: float
    d_min: float
    scenarios: list[ScenarioVerbal]

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "unit": self.unit,
            "test": self.test,
            "alpha": self.alpha,
            "d_min": self.d_min,
            "scenarios": [s.to_dict() for s in self.scenarios],
        }


def personality_documents(corpus: Corpus) -> list[Document]:
    """One document per personality-agent utterance of completed trials.

    Documents are grouped by ``(scenario, personality)``.
    """
    return [
        Document((trial.scenario, trial.personality), trial.trial_id, u.text)
        for trial in corpus.completed()
        for u in trial.utterances_of(Speaker.PERSONALITY.value)
    ]


def _compare(
    feature: str,
    label: str,
    ext: GroupScores,
    intro: GroupScores,
    student: bool,
) -> FeatureRow:
    test = student_t_test if student else welch_t_test
    mean_ext, mean_int = ext.mean(feature), intro.mean(feature)
    try:
        result: TTestResult | None = test(ext.values(feature), intro.values(feature))
        direction = direction_of(result)
    except DegenerateSamples:
        logger.warning("%s: constant samples with different means", feature)
        result = None
        direction = EXT_GREATER if mean_ext > mean_int else EXT_LESS
    return FeatureRow(feature, label, mean_ext, mean_int, result, direction)


def analyze_verbal(
    corpus: Corpus,
    lexicon: Lexicon,
    directions: ExpectedDirections,
    options: AnalysisOptions | None = None,
) -> VerbalSection:
    """Compare extrovert and introvert utterances lexically, per scenario.

    Raises:
        EmptyGroup: If a scenario lacks scoreable utterances for one of
            the personalities.
        StatsError: If a group has fewer than two documents.
    """
    options = options or AnalysisOptions()
    scores = score_corpus(personality_documents(corpus), lexicon, options.unit)
    sections = []
    for scenario in corpus.scenarios():
        groups = {}
        for personality in PERSONALITIES:
            group = scores.get((scenario, personality))
            if group is None or not group.vectors:
                raise EmptyGroup(f"{scenario.value}/{personality.value}")
            groups[personality] = group
        ext, intro = groups[Personality.EXTROVERT], groups[Personality.INTROVERT]

        counts = [
            _compare(f, label, ext, intro, options.student)
            for f, label in COUNT_FEATURES.items()
        ]
        features = []
        for cat_id in lexicon.ids():
            row = _compare(
                cat_id,
                f"{cat_id} ({lexicon.name_of(cat_id)})",
                ext,
                intro,
                options.student,
            )
            row.aligned = directions.verdict(cat_id, row.direction)
            features.append(row)

        testable = {r.feature: r.result for r in features if r.result is not None}
        kept = significance_filter(testable, options.alpha, options.d_min)
        by_id = {r.feature: r for r in features}
        selected = []
        for item in kept:
            by_id[item.feature].selected = True
            selected.append(by_id[item.feature])

        sections.append(
            ScenarioVerbal(
                scenario=scenario,
                documents={p: len(g.vectors) for p, g in groups.items()},
                excluded={p: g.excluded for p, g in groups.items()},
                counts=counts,
                features=features,
                selected=selected,
            )
        )
        logger.info(
            "%s: %d of %d categories pass the filter",
            scenario.value,
            len(selected),
            len(features),
        )
    return VerbalSection(
        unit=options.unit.value,
        test="student" if options.student else "welch",
        alpha=options.alpha,
        d_min=options.d_min,
        scenarios=sections,
    )
