"""Time bases and proximal-effect trends.

A trend describes how a level's standardized proximal effect evolves over
the study. Four shapes are supported: constant, linear, linear-then-constant
(a linear spline that plateaus at a peak day), and quadratic. Each level's
coefficient vector is solved from user-facing targets: the initial effect at
the level's first active day, the average effect over its active days, and
the day the effect peaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateTrend

SHAPE_CONSTANT = "constant"
SHAPE_LINEAR = "linear"
SHAPE_SPLINE = "linear and constant"
SHAPE_QUADRATIC = "quadratic"
SHAPES = (SHAPE_CONSTANT, SHAPE_LINEAR, SHAPE_SPLINE, SHAPE_QUADRATIC)

_DIMENSION = {
    SHAPE_CONSTANT: 1,
    SHAPE_LINEAR: 2,
    SHAPE_SPLINE: 2,
    SHAPE_QUADRATIC: 3,
}


def basis_dimension(shape: str) -> int:
    """Number of coefficients (p) used by a trend shape."""
    try:
        return _DIMENSION[shape]
    except KeyError:
        raise ValueError(f"unknown trend shape {shape!r}; expected one of {SHAPES}")


def time_index(day: int, occasion: int, occasions_per_day: int) -> float:
    """Elapsed-time index s for a decision point: ((d-1)T + t - 1) / T."""
    return ((day - 1) * occasions_per_day + occasion - 1) / occasions_per_day


def time_grid(days: int, occasions_per_day: int) -> np.ndarray:
    """s values for every decision point, day-major then occasion."""
    pts = np.arange(days * occasions_per_day, dtype=float)
    return pts / occasions_per_day


def day_of_point(days: int, occasions_per_day: int) -> np.ndarray:
    """Day number (1-based) of each decision point in grid order."""
    return np.repeat(np.arange(1, days + 1), occasions_per_day)


@dataclass(frozen=True)
class EffectTrend:
    """Per-level proximal-effect shape with its solving targets.

    mean and initial are per-level vectors (one entry per active level, in
    addition order). peak_day gives, for the spline and quadratic shapes,
    the first day on which the trend reaches its maximum; it may lie beyond
    the study end, in which case the spline simply never plateaus in-window.
    """

    shape: str
    mean: tuple[float, ...]
    initial: tuple[float, ...] = ()
    peak_day: tuple[float, ...] = ()

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown trend shape {self.shape!r}; expected one of {SHAPES}")
        object.__setattr__(self, "mean", tuple(float(v) for v in self.mean))
        if not self.mean:
            raise ValueError("trend needs at least one level target")
        m = len(self.mean)
        initial = tuple(float(v) for v in self.initial)
        peak = tuple(float(v) for v in self.peak_day)
        if self.shape != SHAPE_CONSTANT:
            if len(initial) != m:
                raise ValueError(f"initial targets: expected {m} entries, got {len(initial)}")
        if self.shape in (SHAPE_SPLINE, SHAPE_QUADRATIC):
            if len(peak) != m:
                raise ValueError(f"peak days: expected {m} entries, got {len(peak)}")
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "peak_day", peak)

    @property
    def p(self) -> int:
        return basis_dimension(self.shape)

    @property
    def n_levels(self) -> int:
        return len(self.mean)


def _shape_column(shape: str, s: np.ndarray, peak_day: float | None) -> np.ndarray:
    """Second basis entry as a function of s (first entry is always 1)."""
    if shape == SHAPE_LINEAR:
        return s
    if shape == SHAPE_SPLINE:
        return np.minimum(peak_day - 1.0, s)
    raise ValueError(shape)


def basis_matrix(trend: EffectTrend, level: int, days: int, occasions_per_day: int) -> np.ndarray:
    """Z rows for one level over every decision point, shape (D*T, p).

    level is 1-based, matching the design's level ids.
    """
    s = time_grid(days, occasions_per_day)
    if trend.shape == SHAPE_CONSTANT:
        return np.ones((s.size, 1))
    if trend.shape == SHAPE_QUADRATIC:
        return np.column_stack([np.ones_like(s), s, s * s])
    col = _shape_column(trend.shape, s, trend.peak_day[level - 1] if trend.shape == SHAPE_SPLINE else None)
    return np.column_stack([np.ones_like(s), col])


def z_basis(trend: EffectTrend, level: int, day: int, occasion: int, occasions_per_day: int) -> np.ndarray:
    """Effect basis Z for one level at one decision point."""
    s = time_index(day, occasion, occasions_per_day)
    if trend.shape == SHAPE_CONSTANT:
        return np.array([1.0])
    if trend.shape == SHAPE_QUADRATIC:
        return np.array([1.0, s, s * s])
    if trend.shape == SHAPE_SPLINE:
        return np.array([1.0, min(trend.peak_day[level - 1] - 1.0, s)])
    return np.array([1.0, s])


def intercept_basis(q: int, day: int, occasion: int, occasions_per_day: int) -> np.ndarray:
    """Intercept basis B = (1, s, ..., s^(q-1)) at one decision point."""
    s = time_index(day, occasion, occasions_per_day)
    return s ** np.arange(q)


def intercept_matrix(q: int, days: int, occasions_per_day: int) -> np.ndarray:
    """B rows for every decision point, shape (D*T, q)."""
    s = time_grid(days, occasions_per_day)
    return s[:, None] ** np.arange(q)[None, :]


def solve_coefficients(
    trend: EffectTrend,
    days: int,
    occasions_per_day: int = 1,
    addition_days: Sequence[int] | None = None,
) -> np.ndarray:
    """Solve each level's coefficient vector from its targets.

    Targets are anchored on the level's own schedule: the initial target is
    the trend value on the level's first active day, and the mean target is
    the average over the decision points from that day to the study end.
    For a level active from day 1 this is the plain initial value and the
    whole-study average.

    Returns an (M, p) array. Raises DegenerateTrend when the constraints do
    not pin down a unique solution (for example a spline whose plateau falls
    on or before the level's first active day while mean != initial).
    """
    m_levels = trend.n_levels
    if addition_days is None:
        addition_days = [1] * m_levels
    if len(addition_days) != m_levels:
        raise ValueError(f"expected {m_levels} addition days, got {len(addition_days)}")

    if trend.shape == SHAPE_CONSTANT:
        return np.array([[v] for v in trend.mean])

    s = time_grid(days, occasions_per_day)
    day_idx = day_of_point(days, occasions_per_day)
    coefs = np.empty((m_levels, trend.p))
    for m in range(m_levels):
        a_day = int(addition_days[m])
        init = trend.initial[m]
        mean = trend.mean[m]
        active = day_idx >= a_day
        if not active.any():
            raise DegenerateTrend(f"level {m + 1} is never active (addition day {a_day} > {days})")
        s_anchor = time_index(a_day, 1, occasions_per_day)
        if trend.shape == SHAPE_QUADRATIC:
            peak = trend.peak_day[m]
            rows = np.array(
                [
                    [1.0, s_anchor, s_anchor**2],
                    [0.0, 1.0, 2.0 * (peak - 1.0)],
                    [1.0, s[active].mean(), (s[active] ** 2).mean()],
                ]
            )
            rhs = np.array([init, 0.0, mean])
            if abs(np.linalg.det(rows)) < 1e-12:
                raise DegenerateTrend(
                    f"quadratic constraints are singular for level {m + 1} (peak day {peak})"
                )
            coefs[m] = np.linalg.solve(rows, rhs)
        else:
            peak = trend.peak_day[m] if trend.shape == SHAPE_SPLINE else None
            z = _shape_column(trend.shape, s, peak)
            z_anchor = float(_shape_column(trend.shape, np.array([s_anchor]), peak)[0])
            z_mean = z[active].mean()
            if abs(z_mean - z_anchor) < 1e-12:
                if abs(mean - init) < 1e-12:
                    coefs[m] = (init, 0.0)
                    continue
                raise DegenerateTrend(
                    f"level {m + 1}: slope undefined, basis is constant over the active window"
                )
            slope = (mean - init) / (z_mean - z_anchor)
            coefs[m] = (init - slope * z_anchor, slope)
    return coefs


def trend_values(
    trend: EffectTrend,
    coefs: np.ndarray,
    days: int,
    occasions_per_day: int = 1,
) -> np.ndarray:
    """Trend value delta_m(d, t) for every level and decision point, (M, D*T)."""
    out = np.empty((trend.n_levels, days * occasions_per_day))
    for m in range(trend.n_levels):
        out[m] = basis_matrix(trend, m + 1, days, occasions_per_day) @ coefs[m]
    return out
