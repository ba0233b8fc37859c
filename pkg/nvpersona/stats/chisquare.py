"""Pearson's chi-square test of independence on r x c count tables.

For 2 x 2 tables Yates' continuity correction is applied by default and
the uncorrected statistic is reported alongside.  The correction never
moves an observed count past its expected value, so a table in perfect
independence scores 0 with or without it.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from nvpersona.errors import StatsError, YatesOnlyFor2x2, ZeroMarginal
from nvpersona.stats.distributions import chi2_sf


@dataclass(frozen=True)
class ChiSquareResult:
    """Outcome of a chi-square test.

    Attributes:
        chi2: Test statistic (Yates-corrected if ``yates``).
        df: Degrees of freedom, ``(r - 1)(c - 1)``.
        p: Upper-tail p-value of ``chi2``.
        yates: Whether the continuity correction was applied.
        observed: Observed counts.
        expected: Expected counts under independence.
        chi2_uncorrected: Statistic without the correction.
        p_uncorrected: p-value of ``chi2_uncorrected``.
    """

    chi2: float
    df: int
    p: float
    yates: bool
    observed: tuple[tuple[int, ...], ...]
    expected: tuple[tuple[float, ...], ...]
    chi2_uncorrected: float
    p_uncorrected: float

    def to_dict(self) -> dict[str, object]:
        """Plain-data form for JSON reports."""
        return {
            "chi2": self.chi2,
            "df": self.df,
            "p": self.p,
            "yates": self.yates,
            "observed": [list(row) for row in self.observed],
            "expected": [list(row) for row in self.expected],
            "chi2_uncorrected": self.chi2_uncorrected,
            "p_uncorrected": self.p_uncorrected,
        }


def _statistic(observed: np.ndarray, expected: np.ndarray, correction: float) -> float:
    deviation = np.maximum(np.abs(observed - expected) - correction, 0.0)
    return float(np.sum(deviation**2 / expected))


def chi_square(
    table: Sequence[Sequence[int]] | np.ndarray, yates: bool | None = None
) -> ChiSquareResult:
    """Test rows against columns of a contingency table.

    Args:
        table: Non-negative counts, at least 2 x 2.
        yates: Continuity correction; ``None`` applies it exactly when
            ``df == 1``.

    Raises:
        StatsError: On a malformed table or negative counts.
        ZeroMarginal: If a row or column sums to zero.
        YatesOnlyFor2x2: If ``yates`` is requested with ``df != 1``.
    """
    observed = np.asarray(table, dtype=float)
    if observed.ndim != 2 or min(observed.shape) < 2:
        msg = f"need an r x c table with r, c >= 2, got shape {observed.shape}"
        raise StatsError(msg)
    if np.any(observed < 0) or not np.all(np.isfinite(observed)):
        msg = "counts must be finite and non-negative"
        raise StatsError(msg)

    rows = observed.sum(axis=1)
    cols = observed.sum(axis=0)
    for index, total in enumerate(rows):
        if total == 0:
            raise ZeroMarginal("row", index)
    for index, total in enumerate(cols):
        if total == 0:
            raise ZeroMarginal("column", index)

    df = (observed.shape[0] - 1) * (observed.shape[1] - 1)
    if yates is None:
        yates = df == 1
    elif yates and df != 1:
        msg = f"Yates' correction needs a 2 x 2 table (df = 1), got df = {df}"
        raise YatesOnlyFor2x2(msg)

    expected = np.outer(rows, cols) / observed.sum()
    plain = _statistic(observed, expected, 0.0)
    chi2 = _statistic(observed, expected, 0.5) if yates else plain
    return ChiSquareResult(
        chi2=chi2,
        df=df,
        p=chi2_sf(chi2, df),
        yates=yates,
        observed=tuple(tuple(int(v) for v in row) for row in observed),
        expected=tuple(tuple(float(v) for v in row) for row in expected),
        chi2_uncorrected=plain,
        p_uncorrected=chi2_sf(plain, df),
    )
