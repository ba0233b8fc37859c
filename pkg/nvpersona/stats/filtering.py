"""Feature selection by significance and effect size."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from nvpersona.stats.ttest import TTestResult

EXT_GREATER = "EXT>INT"
EXT_LESS = "EXT<INT"
EXT_EQUAL = "EXT=INT"


def direction_of(result: TTestResult) -> str:
    """Direction label of an extrovert-vs-introvert comparison."""
    if result.mean_a > result.mean_b:
        return EXT_GREATER
    if result.mean_a < result.mean_b:
        return EXT_LESS
    return EXT_EQUAL


def significance_stars(p: float) -> str:
    """``***`` below .001, ``**`` below .01, ``*`` below .05."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class SelectedFeature:
    """A feature that passed the filter.

    Attributes:
        feature: Feature id.
        result: Its t-test (extrovert as ``a``, introvert as ``b``).
        direction: ``EXT>INT`` or ``EXT<INT``.
    """

    feature: str
    result: TTestResult
    direction: str


def significance_filter(
    results: Mapping[str, TTestResult],
    alpha: float = 0.05,
    d_min: float = 0.5,
) -> list[SelectedFeature]:
    """Keep features with ``p < alpha`` and ``|d| > d_min``.

    Returns:
        Kept features by descending ``|d|`` (ties by feature id).
    """
    kept = [
        SelectedFeature(feature, result, direction_of(result))
        for feature, result in results.items()
        if result.p_two_sided < alpha and abs(result.cohens_d) > d_min
    ]
    kept.sort(key=lambda s: (-abs(s.result.cohens_d), s.feature))
    return kept
