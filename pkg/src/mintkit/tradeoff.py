"""Abstractiveness-factuality tradeoff measures.

All quantities are percentages in [0, 100].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

DEFAULT_PHI = 2.0


class DegenerateSeriesError(ValueError):
    pass


def _check_pct(name: str, v: float) -> None:
    if not (math.isfinite(v) and 0.0 <= v <= 100.0):
        raise ValueError(f"{name} must be a percentage in [0, 100], got {v!r}")


@dataclass(frozen=True)
class TradeoffPoint:
    label: str
    abstractiveness: float
    factuality: float

    def __post_init__(self):
        _check_pct("abstractiveness", self.abstractiveness)
        _check_pct("factuality", self.factuality)


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    n_points: int
    r_squared: float


def mu_score(factuality: float, abstractiveness: float, phi: float = DEFAULT_PHI) -> float:
    """Factuality-weighted mean of factuality and abstractiveness.

    >>> round(mu_score(88.7, 19.6), 1)
    65.7
    """
    _check_pct("factuality", factuality)
    _check_pct("abstractiveness", abstractiveness)
    if not phi > 0:
        raise ValueError("phi must be positive")
    return (phi * factuality + abstractiveness) / (phi + 1.0)


def fit_trend(points: Sequence[TradeoffPoint]) -> TrendFit:
    """Ordinary least squares line of factuality on abstractiveness."""
    n = len(points)
    if n < 2:
        raise DegenerateSeriesError("need at least two points for a trend line")
    xs = [p.abstractiveness for p in points]
    ys = [p.factuality for p in points]
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateSeriesError("all abstractiveness values are equal")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = math.fsum((y - my) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = my - slope * mx
    r2 = 1.0 if syy == 0.0 else min(1.0, sxy * sxy / (sxx * syy))
    return TrendFit(slope, intercept, n, r2)


def f_at(fit: TrendFit, abstractiveness: float = 50.0) -> float:
    return fit.intercept + fit.slope * abstractiveness


def pearson_r(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValueError("sequences differ in length")
    if len(a) < 2:
        raise DegenerateSeriesError("need at least two values")
    ma = math.fsum(a) / len(a)
    mb = math.fsum(b) / len(b)
    da = [v - ma for v in a]
    db = [v - mb for v in b]
    saa = math.fsum(v * v for v in da)
    sbb = math.fsum(v * v for v in db)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateSeriesError("zero variance")
    r = math.fsum(u * v for u, v in zip(da, db)) / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))
