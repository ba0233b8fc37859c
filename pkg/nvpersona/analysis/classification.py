"""Classification — binary extraversion labels for personality utterances.

Every personality-agent utterance of a completed trial is labelled 1
(extraverted) or 0 by a classifier.  Per scenario the share of 1-labels
is compared between the two personalities with a 2 x 2 chi-square test;
a pooled table and a scenario-by-personality interaction table follow.

Two classifiers ship:

* ``LexiconBaseline`` labels a text 1 when its combined rate of the
  configured categories (positive emotion and social words by default)
  reaches a threshold.  Transparent and offline.
* ``HttpClassifier`` wraps an external model behind the contract::

      POST {endpoint}  {"text": "..."}  ->  {"extravert": 0 | 1}

  Calls use the gateway's retry policy.  Failures after retries leave
  the utterance unlabelled; a classifier that labels nothing marks the
  section unavailable.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

import httpx

from nvpersona.errors import (
    ConfigError,
    EmptyDocument,
    EmptyGroup,
    GatewayError,
    ZeroMarginal,
)
from nvpersona.linguistics.lexicon import Lexicon
from nvpersona.linguistics.scoring import score
from nvpersona.llm.backends import BackendConfig, HttpBackend
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind, Speaker
from nvpersona.simulation.experiment import Corpus
from nvpersona.stats.chisquare import ChiSquareResult, chi_square

logger = logging.getLogger(__name__)

PERSONALITIES = (Personality.EXTROVERT, Personality.INTROVERT)


class Classifier(Protocol):
    """Labels one text as extraverted (1) or not (0)."""

    @property
    def descriptor(self) -> str:
        """Short name recorded in reports."""
        ...

    def label(self, text: str) -> int | None:
        """Return 0 or 1, or ``None`` when the text cannot be labelled."""
        ...


@dataclass(frozen=True)
class LexiconBaseline:
    """Threshold on the summed rate of a few lexicon categories.

    Attributes:
        lexicon: Lexicon to score with.
        threshold: Minimum combined percentage for label 1.
        categories: Category ids whose percentages are summed.
    """

    lexicon: Lexicon
    threshold: float = 10.0
    categories: tuple[str, ...] = ("posemo", "social")

    def __post_init__(self) -> None:
        """Check the categories exist."""
        missing = [c for c in self.categories if c not in self.lexicon.categories]
        if missing:
            msg = f"baseline categories not in the lexicon: {', '.join(missing)}"
            raise ConfigError(msg)

    @property
    def descriptor(self) -> str:
        """``lexicon:<cats>>=<threshold>``."""
        return f"lexicon:{'+'.join(self.categories)}>={self.threshold:g}"

    def rate(self, text: str) -> float:
        """Combined percentage of the baseline categories in ``text``."""
        vector = score(text, self.lexicon)
        return sum(vector.percentages[c] for c in self.categories)

    def label(self, text: str) -> int | None:
        """1 when the rate reaches the threshold; ``None`` without tokens."""
        try:
            return int(self.rate(text) >= self.threshold)
        except EmptyDocument:
            return None


@dataclass
class HttpClassifier:
    """Client for an external extraversion model.

    Attributes:
        backend: HTTP transport carrying the retry policy.
    """

    backend: HttpBackend

    @classmethod
    def for_endpoint(
        cls,
        endpoint: str,
        settings: BackendConfig | None = None,
        transport: httpx.BaseTransport | None = None,
    ) -> HttpClassifier:
        """Build a client reusing the timeout and retry settings of a backend."""
        settings = settings or BackendConfig()
        return cls(
            HttpBackend(
                endpoint=endpoint,
                timeout=settings.timeout,
                max_attempts=settings.max_attempts,
                backoff_base=settings.backoff_base,
                transport=transport,
            )
        )

    @property
    def descriptor(self) -> str:
        """``http:<endpoint>``."""
        return self.backend.descriptor

    def label(self, text: str) -> int | None:
        """Ask the endpoint; ``None`` after failed retries or a bad reply."""
        try:
            data = self.backend.post_json({"text": text}, auth=False)
        except GatewayError as exc:
            logger.warning("classifier call failed: %s", exc)
            return None
        value = data.get("extravert") if isinstance(data, dict) else None
        if value not in (0, 1) or isinstance(value, bool):
            logger.warning("classifier reply without a 0/1 'extravert': %r", data)
            return None
        return int(value)

    def close(self) -> None:
        """Release the HTTP connections."""
        self.backend.close()


@dataclass(frozen=True)
class LabelRecord:
    """One labelled utterance, as persisted for auditing.

    Attributes:
        trial_id: Trial of the utterance.
        turn_index: Its position in the trial.
        scenario: Scenario kind.
        personality: Personality of the speaking agent.
        label: 0, 1 or ``None`` when labelling failed.
    """

    trial_id: str
    turn_index: int
    scenario: ScenarioKind
    personality: Personality
    label: int | None

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for ``labels.jsonl``."""
        return {
            "trial_id": self.trial_id,
            "turn_index": self.turn_index,
            "scenario": self.scenario.value,
            "personality": self.personality.value,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LabelRecord:
        """Inverse of :meth:`to_dict`."""
        return cls(
            trial_id=str(data["trial_id"]),
            turn_index=int(data["turn_index"]),
            scenario=ScenarioKind(data["scenario"]),
            personality=Personality(data["personality"]),
            label=None if data.get("label") is None else int(data["label"]),
        )


@dataclass(frozen=True)
class Proportion:
    """Labelled utterances of one (scenario, personality) cell.

    Attributes:
        positive: Utterances labelled 1.
        labelled: Utterances labelled 0 or 1.
        missing: Utterances the classifier could not label.
    """

    positive: int
    labelled: int
    missing: int = 0

    @property
    def value(self) -> float:
        """Share of 1-labels among the labelled utterances."""
        return self.positive / self.labelled if self.labelled else 0.0

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "positive": self.positive,
            "labelled": self.labelled,
            "missing": self.missing,
            "proportion": self.value,
        }


Cell = tuple[ScenarioKind, Personality]


def tally(records: Iterable[LabelRecord]) -> dict[Cell, Proportion]:
    """Count labels per (scenario, personality)."""
    counts: dict[Cell, list[int]] = {}
    for record in records:
        cell = counts.setdefault((record.scenario, record.personality), [0, 0, 0])
        if record.label is None:
            cell[2] += 1
        else:
            cell[0] += record.label
            cell[1] += 1
    return {key: Proportion(*values) for key, values in counts.items()}


def proportions_from_labels(
    records: Iterable[LabelRecord | dict[str, Any]],
) -> dict[Cell, float]:
    """Recompute the reported shares from persisted label records."""
    parsed = [
        r if isinstance(r, LabelRecord) else LabelRecord.from_dict(r) for r in records
    ]
    return {key: cell.value for key, cell in tally(parsed).items()}


def independence_test(
    table: Sequence[Sequence[int]], yates: bool | None = None
) -> ChiSquareResult:
    """Chi-square test that scores a constant label column as independence.

    When every utterance got the same label a label column sums to zero;
    the groups then cannot differ and the result is ``chi2 = 0, p = 1``.

    Raises:
        ZeroMarginal: If a group row has no labelled utterances.
    """
    try:
        return chi_square(table, yates=yates)
    except ZeroMarginal as exc:
        if exc.axis != "column":
            raise
    rows = len(table)
    df = rows - 1
    observed = tuple(tuple(int(c) for c in row) for row in table)
    return ChiSquareResult(
        chi2=0.0,
        df=df,
        p=1.0,
        yates=bool(yates if yates is not None else df == 1),
        observed=observed,
        expected=tuple(tuple(float(c) for c in row) for row in observed),
        chi2_uncorrected=0.0,
        p_uncorrected=1.0,
    )


def _row(cell: Proportion) -> list[int]:
    return [cell.positive, cell.labelled - cell.positive]


@dataclass
class ScenarioClassification:
    """Classification outcome for one scenario.

    Attributes:
        scenario: The scenario.
        proportions: Label tallies per personality.
        test: 2 x 2 chi-square, personality by label.
    """

    scenario: ScenarioKind
    proportions: dict[Personality, Proportion]
    test: ChiSquareResult

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports."""
        return {
            "scenario": self.scenario.value,
            "proportions": {p.value: c.to_dict() for p, c in self.proportions.items()},
            "test": self.test.to_dict(),
        }


@dataclass
class ClassificationSection:
    """Classification results.

    Attributes:
        classifier: Descriptor of the classifier used.
        available: False when the classifier labelled nothing.
        reason: Why the section is unavailable.
        scenarios: Per-scenario outcomes.
        pooled: Both scenarios combined, personality by label.
        interaction: (scenario, personality) by label, with two or
            more scenarios.
        labels: Every label record, corpus order.
    """

    classifier: str
    available: bool = True
    reason: str = ""
    scenarios: list[ScenarioClassification] = field(default_factory=list)
    pooled: ChiSquareResult | None = None
    interaction: ChiSquareResult | None = None
    labels: list[LabelRecord] = field(default_factory=list)

    @property
    def missing(self) -> int:
        """Utterances without a label."""
        return sum(1 for r in self.labels if r.label is None)

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for JSON reports (labels go to ``labels.jsonl``)."""
        return {
            "classifier": self.classifier,
            "available": self.available,
            "reason": self.reason,
            "labelled": len(self.labels) - self.missing,
            "missing": self.missing,
            "scenarios": [s.to_dict() for s in self.scenarios],
            "pooled": None if self.pooled is None else self.pooled.to_dict(),
            "interaction": (
                None if self.interaction is None else self.interaction.to_dict()
            ),
        }


def label_corpus(corpus: Corpus, classifier: Classifier) -> list[LabelRecord]:
    """Label every personality-agent utterance of the completed trials."""
    records = []
    for trial in corpus.completed():
        for utterance in trial.utterances_of(Speaker.PERSONALITY.value):
            records.append(
                LabelRecord(
                    trial_id=trial.trial_id,
                    turn_index=utterance.turn_index,
                    scenario=trial.scenario,
                    personality=trial.personality,
                    label=classifier.label(utterance.text),
                )
            )
    logger.debug("labelled %d utterances with %s", len(records), classifier.descriptor)
    return records


def classify_extraversion(
    corpus: Corpus, classifier: Classifier, yates: bool = True
) -> ClassificationSection:
    """Label the corpus and test label shares between personalities.

    Args:
        corpus: The run to analyse.
        classifier: Labeller for single utterances.
        yates: Continuity correction on the 2 x 2 tables.

    Raises:
        EmptyGroup: If a scenario has no labelled utterance for one of
            the personalities.
    """
    records = label_corpus(corpus, classifier)
    section = ClassificationSection(classifier=classifier.descriptor, labels=records)
    if records and all(r.label is None for r in records):
        section.available = False
        section.reason = (
            f"{classifier.descriptor} labelled none of {len(records)} utterances"
        )
        logger.warning("classification unavailable: %s", section.reason)
        return section

    cells = tally(records)
    for scenario in corpus.scenarios():
        proportions = {}
        for personality in PERSONALITIES:
            cell = cells.get((scenario, personality))
            if cell is None or cell.labelled == 0:
                raise EmptyGroup(f"{scenario.value}/{personality.value}")
            proportions[personality] = cell
        table = [_row(proportions[p]) for p in PERSONALITIES]
        section.scenarios.append(
            ScenarioClassification(
                scenario, proportions, independence_test(table, yates)
            )
        )
        if section.missing:
            logger.warning(
                "%s: %d utterances left unlabelled",
                scenario.value,
                sum(proportions[p].missing for p in PERSONALITIES),
            )

    if len(section.scenarios) > 1:
        pooled = [[0, 0], [0, 0]]
        interaction = []
        for outcome in section.scenarios:
            for i, personality in enumerate(PERSONALITIES):
                row = _row(outcome.proportions[personality])
                pooled[i][0] += row[0]
                pooled[i][1] += row[1]
                interaction.append(row)
        section.pooled = independence_test(pooled, yates)
        section.interaction = independence_test(interaction, yates=False)
    return section
