"""Two-sample t-tests with Cohen's d.

Welch's test (unequal variances, Welch–Satterthwaite degrees of freedom)
is the default; Student's pooled-variance test is kept for sensitivity
checks.  Cohen's d always uses the pooled standard deviation.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from nvpersona.errors import DegenerateSamples, StatsError
from nvpersona.stats.distributions import t_two_sided


@dataclass(frozen=True)
class TTestResult:
    """Outcome of a two-sample t-test of ``a`` against ``b``.

    Attributes:
        t: Test statistic, positive when ``a`` has the larger mean.
        df: Degrees of freedom.
        p_two_sided: Two-sided p-value.
        cohens_d: Standardized mean difference (pooled SD).
        mean_a: Mean of ``a``.
        mean_b: Mean of ``b``.
        sd_a: Sample standard deviation of ``a``.
        sd_b: Sample standard deviation of ``b``.
        n_a: Size of ``a``.
        n_b: Size of ``b``.
        variant: ``"welch"`` or ``"student"``.
    """

    t: float
    df: float
    p_two_sided: float
    cohens_d: float
    mean_a: float
    mean_b: float
    sd_a: float
    sd_b: float
    n_a: int
    n_b: int
    variant: str = "welch"

    def to_dict(self) -> dict[str, float | int | str]:
        """Plain-data form for JSON reports."""
        return {
            "t": self.t,
            "df": self.df,
            "p": self.p_two_sided,
            "d": self.cohens_d,
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "sd_a": self.sd_a,
            "sd_b": self.sd_b,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "variant": self.variant,
        }


@dataclass(frozen=True)
class _Moments:
    n: int
    mean: float
    var: float


def _moments(sample: Sequence[float] | np.ndarray, label: str) -> _Moments:
    values = np.asarray(sample, dtype=float)
    if values.ndim != 1 or values.size < 2:
        msg = f"sample {label} needs at least 2 values, got {values.size}"
        raise StatsError(msg)
    if not np.all(np.isfinite(values)):
        msg = f"sample {label} contains non-finite values"
        raise StatsError(msg)
    return _Moments(int(values.size), float(values.mean()), float(values.var(ddof=1)))


def _pooled_var(a: _Moments, b: _Moments) -> float:
    return ((a.n - 1) * a.var + (b.n - 1) * b.var) / (a.n + b.n - 2)


def _result(
    a: _Moments, b: _Moments, t: float, df: float, variant: str
) -> TTestResult:
    pooled_sd = math.sqrt(_pooled_var(a, b))
    return TTestResult(
        t=t,
        df=df,
        p_two_sided=t_two_sided(t, df),
        cohens_d=(a.mean - b.mean) / pooled_sd,
        mean_a=a.mean,
        mean_b=b.mean,
        sd_a=math.sqrt(a.var),
        sd_b=math.sqrt(b.var),
        n_a=a.n,
        n_b=b.n,
        variant=variant,
    )


def _constant_result(a: _Moments, b: _Moments, variant: str) -> TTestResult:
    """Both samples constant: equal means give t = 0, otherwise raise."""
    if not np.isclose(a.mean, b.mean, rtol=1e-9, atol=1e-12):
        raise DegenerateSamples(a.mean, b.mean)
    return TTestResult(
        t=0.0,
        df=float(a.n + b.n - 2),
        p_two_sided=1.0,
        cohens_d=0.0,
        mean_a=a.mean,
        mean_b=b.mean,
        sd_a=0.0,
        sd_b=0.0,
        n_a=a.n,
        n_b=b.n,
        variant=variant,
    )


def welch_t_test(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray
) -> TTestResult:
    """Welch's unequal-variance t-test of ``a`` against ``b``.

    Raises:
        StatsError: If a sample has fewer than two values.
        DegenerateSamples: If both samples are constant with different
            means.
    """
    ma, mb = _moments(a, "a"), _moments(b, "b")
    if ma.var == 0 and mb.var == 0:
        return _constant_result(ma, mb, "welch")
    va, vb = ma.var / ma.n, mb.var / mb.n
    t = (ma.mean - mb.mean) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (ma.n - 1) + vb**2 / (mb.n - 1))
    return _result(ma, mb, t, df, "welch")


def student_t_test(
    a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray
) -> TTestResult:
    """Student's pooled-variance t-test of ``a`` against ``b``.

    Raises:
        StatsError: If a sample has fewer than two values.
        DegenerateSamples: If both samples are constant with different
            means.
    """
    ma, mb = _moments(a, "a"), _moments(b, "b")
    if ma.var == 0 and mb.var == 0:
        return _constant_result(ma, mb, "student")
    se = math.sqrt(_pooled_var(ma, mb) * (1 / ma.n + 1 / mb.n))
    t = (ma.mean - mb.mean) / se
    return _result(ma, mb, t, float(ma.n + mb.n - 2), "student")
