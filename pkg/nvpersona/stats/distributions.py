"""Distribution tails for the t and chi-square tests.

Both go through the regularized special functions in ``scipy.special``:
the t tail is ``I_x(df/2, 1/2) / 2`` with ``x = df / (df + t^2)`` and the
chi-square survival function is the upper regularized gamma
``Q(df/2, x/2)``.
"""

from __future__ import annotations

import math

from scipy import special


def _check_df(df: float) -> None:
    if not df > 0:
        msg = f"degrees of freedom must be > 0, got {df}"
        raise ValueError(msg)


def t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with ``df`` degrees of freedom."""
    _check_df(df)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom."""
    return 1.0 - t_sf(t, df)


def t_two_sided(t: float, df: float) -> float:
    """Two-sided p-value of an observed ``t``."""
    return min(1.0, 2.0 * t_sf(abs(t), df))


def chi2_sf(x: float, df: float) -> float:
    """P(X > x) for chi-square with ``df`` degrees of freedom."""
    _check_df(df)
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))
