"""Scoring — word counts and per-category percentages of documents.

Tokens are maximal runs of letters and apostrophes, lowercased, with
quote-like apostrophes at either end trimmed.  Hyphens and digits split
tokens and digits never form tokens.  Sentences are runs of ``.?!``; a
non-empty text has at least one.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Hashable, Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from nvpersona.errors import EmptyDocument, EmptyGroup
from nvpersona.linguistics.lexicon import Lexicon

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"(?:[^\W\d_]|')+")
_SENTENCE_END_RE = re.compile(r"[.?!]+")


class DocumentUnit(Enum):
    """What one scored document is."""

    UTTERANCE = "utterance"
    TRIAL = "trial"


def tokenize(text: str) -> tuple[list[str], int]:
    """Split ``text`` into lowercase word tokens and count its sentences.

    Returns:
        ``(tokens, sentence_count)``; ``([], 0)`` for empty text.
    """
    text = text.replace("’", "'")
    tokens = [
        token
        for token in (m.group(0).strip("'").lower() for m in _TOKEN_RE.finditer(text))
        if token
    ]
    if not text.strip():
        return tokens, 0
    return tokens, max(1, len(_SENTENCE_END_RE.findall(text)))


@dataclass(frozen=True)
class FeatureVector:
    """Lexical features of one document.

    Attributes:
        word_count: Number of tokens (at least 1).
        sentence_count: Number of sentences.
        counts: Matching tokens per category id.
        percentages: ``100 * count / word_count`` per category id.
    """

    word_count: int
    sentence_count: int
    counts: dict[str, int] = field(default_factory=dict)
    percentages: dict[str, float] = field(default_factory=dict)

    def value(self, feature: str) -> float:
        """Value of a category id, ``word_count`` or ``sentence_count``."""
        if feature == "word_count":
            return float(self.word_count)
        if feature == "sentence_count":
            return float(self.sentence_count)
        return self.percentages[feature]


def score(text: str, lexicon: Lexicon) -> FeatureVector:
    """Score one document.

    Raises:
        EmptyDocument: If the text has no word tokens.
    """
    tokens, sentences = tokenize(text)
    if not tokens:
        msg = f"no word tokens in {text[:40]!r}"
        raise EmptyDocument(msg)
    counts = dict.fromkeys(lexicon.ids(), 0)
    for token in tokens:
        for cat_id in lexicon.categories_for(token):
            counts[cat_id] += 1
    n = len(tokens)
    return FeatureVector(
        word_count=n,
        sentence_count=sentences,
        counts=counts,
        percentages={k: 100.0 * c / n for k, c in counts.items()},
    )


@dataclass(frozen=True)
class Document:
    """A text to score, with its grouping keys.

    Attributes:
        group: Aggregation group (e.g. scenario and personality).
        trial_id: Trial the text comes from.
        text: The text itself.
    """

    group: Hashable
    trial_id: str
    text: str


@dataclass
class GroupScores:
    """Feature vectors of one group.

    Attributes:
        vectors: One vector per scoreable document, input order.
        excluded: Documents dropped because they had no tokens.
    """

    vectors: list[FeatureVector] = field(default_factory=list)
    excluded: int = 0

    def values(self, feature: str) -> np.ndarray:
        """Per-document values of ``feature``."""
        return np.array([v.value(feature) for v in self.vectors], dtype=float)

    def mean(self, feature: str) -> float:
        """Unweighted mean of ``feature`` over the group's documents."""
        return float(np.mean(self.values(feature)))


def _merge_trials(documents: Iterable[Document]) -> list[Document]:
    merged: dict[tuple[Hashable, str], list[str]] = {}
    for doc in documents:
        merged.setdefault((doc.group, doc.trial_id), []).append(doc.text)
    return [
        Document(group, trial_id, " ".join(texts))
        for (group, trial_id), texts in merged.items()
    ]


def score_corpus(
    documents: Iterable[Document],
    lexicon: Lexicon,
    unit: DocumentUnit = DocumentUnit.UTTERANCE,
) -> dict[Hashable, GroupScores]:
    """Score documents and collect the vectors per group.

    Args:
        documents: Texts with their group and trial.
        lexicon: Category dictionary.
        unit: Score each text alone, or concatenate each trial's texts.

    Returns:
        Scores per group, groups in first-seen order.
    """
    if unit is DocumentUnit.TRIAL:
        documents = _merge_trials(documents)
    groups: dict[Hashable, GroupScores] = {}
    for doc in documents:
        scores = groups.setdefault(doc.group, GroupScores())
        try:
            scores.vectors.append(score(doc.text, lexicon))
        except EmptyDocument:
            scores.excluded += 1
            logger.warning("excluding empty document from %s", doc.trial_id)
    return groups


def aggregate(
    scores: dict[Hashable, GroupScores], features: Iterable[str]
) -> dict[Hashable, dict[str, float]]:
    """Per-group means of ``features``.

    Raises:
        EmptyGroup: If a group has no scoreable documents.
    """
    features = list(features)
    means = {}
    for group, group_scores in scores.items():
        if not group_scores.vectors:
            raise EmptyGroup(str(group))
        means[group] = {f: group_scores.mean(f) for f in features}
    return means
