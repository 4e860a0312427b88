"""Correlation, trend regression and significance helpers.

The Student t tail is evaluated through the regularized incomplete beta
function (continued fraction, modified Lentz), so this module needs nothing
beyond the standard library and numpy.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 500


class StatsError(ValueError):
    pass


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise StatsError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise StatsError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # use the continued fraction where it converges quickly, symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise StatsError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    if math.isnan(t):
        raise StatsError("t statistic is NaN")
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, x)))


class Correlation(NamedTuple):
    r: float
    p_value: float
    n: int


def _as_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1 or xa.shape != ya.shape:
        raise StatsError(f"series lengths differ: {xa.shape} vs {ya.shape}")
    if len(xa) < 3:
        raise StatsError(f"need at least 3 observations, got {len(xa)}")
    return xa, ya


def _r_to_p(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_two_sided_p(t, n - 2)


def pearson(x: Sequence[float], y: Sequence[float]) -> Correlation:
    xa, ya = _as_pair(x, y)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    return Correlation(r, _r_to_p(r, len(xa)), len(xa))


def rankdata(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties receiving the average of the ranks they span."""
    a = np.asarray(values, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a), dtype=np.float64)
    sorted_a = a[order]
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> Correlation:
    xa, ya = _as_pair(x, y)
    return pearson(rankdata(xa), rankdata(ya))


class Trend(NamedTuple):
    slope: float
    intercept: float
    p_value: float


def ols_trend(years: Sequence[float], values: Sequence[float]) -> Trend:
    """Least-squares line of ``values`` on ``years`` with a two-sided slope p-value."""
    xa, ya = _as_pair(years, values)
    n = len(xa)
    mx, my = xa.mean(), ya.mean()
    dx = xa - mx
    dy = ya - my
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise StatsError("years are constant; slope undefined")
    slope = float(dx @ dy) / sxx
    intercept = float(my - slope * mx)
    resid = dy - slope * dx
    sse = float(resid @ resid)
    if sse == 0.0:
        p = 1.0 if slope == 0.0 else 0.0
    else:
        se = math.sqrt(sse / (n - 2) / sxx)
        p = t_two_sided_p(slope / se, n - 2)
    return Trend(slope, intercept, p)


def stars(p_value: float) -> str:
    """Significance stars at the 0.1%, 1% and 5% levels (strict inequalities)."""
    if not 0.0 <= p_value <= 1.0:
        raise StatsError(f"p-value outside [0, 1]: {p_value}")
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""
