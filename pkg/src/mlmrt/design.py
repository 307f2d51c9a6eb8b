"""Trial design data model: schedules, randomization probabilities, availability.

A design fixes, for every decision point of the study, the randomization
probability of the control level and of each active intervention level, plus
the expected availability. Levels carry dense ids 1..M in addition order;
the control level is id 0. Probabilities are stored explicitly per decision
point so arbitrary allocation schedules are first-class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import trend as trend_mod
from .errors import InvalidProbability, InvalidSchedule

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class AvailabilityPattern:
    """Expected-availability curve, reusing the four trend shapes.

    mean is the average availability over all decision points; initial the
    value at the first point; peak_day the day the curve tops out (spline
    and quadratic shapes only).
    """

    shape: str = trend_mod.SHAPE_CONSTANT
    mean: float = 1.0
    initial: float | None = None
    peak_day: float | None = None

    def values(self, days: int, occasions_per_day: int = 1) -> np.ndarray:
        """Availability tau for every decision point; raises if outside [0, 1]."""
        if self.shape == trend_mod.SHAPE_CONSTANT:
            tau = np.full(days * occasions_per_day, float(self.mean))
        else:
            if self.initial is None:
                raise InvalidProbability("availability pattern needs an initial value")
            t = trend_mod.EffectTrend(
                shape=self.shape,
                mean=(self.mean,),
                initial=(self.initial,),
                peak_day=(self.peak_day,) if self.peak_day is not None else (),
            )
            coefs = trend_mod.solve_coefficients(t, days, occasions_per_day)
            tau = trend_mod.trend_values(t, coefs, days, occasions_per_day)[0]
        lo, hi = tau.min(), tau.max()
        if lo < -1e-12 or hi > 1 + 1e-12:
            raise InvalidProbability(
                f"availability pattern leaves [0, 1]: range [{lo:.6g}, {hi:.6g}]"
            )
        return np.clip(tau, 0.0, 1.0)


@dataclass(frozen=True)
class DesignSpec:
    """Immutable trial design shared by every other module.

    control_prob, level_probs and availability all have one row per decision
    point in day-major order (D*T rows). addition_days[m-1] is the first day
    level m can be assigned.
    """

    days: int
    occasions_per_day: int
    addition_days: tuple[int, ...]
    control_prob: np.ndarray
    level_probs: np.ndarray
    availability: np.ndarray
    availability_pattern: AvailabilityPattern | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "addition_days", tuple(int(d) for d in self.addition_days))
        for name in ("control_prob", "level_probs", "availability"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.days * self.occasions_per_day
        if self.control_prob.shape != (n,):
            raise ValueError(f"control_prob: expected shape ({n},), got {self.control_prob.shape}")
        if self.level_probs.shape != (n, self.n_levels):
            raise ValueError(
                f"level_probs: expected shape ({n}, {self.n_levels}), got {self.level_probs.shape}"
            )
        if self.availability.shape != (n,):
            raise ValueError(f"availability: expected shape ({n},), got {self.availability.shape}")

    @property
    def n_levels(self) -> int:
        return len(self.addition_days)

    @property
    def n_time_points(self) -> int:
        return self.days * self.occasions_per_day

    def addition_schedule(self) -> list[tuple[int, int]]:
        """Distinct addition days with their level counts, as (count, day)."""
        out: list[tuple[int, int]] = []
        for d in dict.fromkeys(self.addition_days):
            out.append((sum(1 for a in self.addition_days if a == d), d))
        return out

    def day_of_row(self) -> np.ndarray:
        return trend_mod.day_of_point(self.days, self.occasions_per_day)


@dataclass(frozen=True)
class Violation:
    """One violated design invariant, located by decision point and level."""

    message: str
    day: int | None = None
    occasion: int | None = None
    level: int | None = None

    def __str__(self) -> str:
        return self.message


def validate(spec: DesignSpec) -> list[Violation]:
    """Check every design invariant; an empty list means the design is valid."""
    out: list[Violation] = []
    days = spec.days
    t_per_day = spec.occasions_per_day

    if days < 1:
        out.append(Violation(f"study length must be positive, got {days}"))
    if t_per_day < 1:
        out.append(Violation(f"occasions per day must be positive, got {t_per_day}"))
    if not spec.addition_days:
        out.append(Violation("design has no intervention levels"))
        return out

    prev = None
    for m, a in enumerate(spec.addition_days, start=1):
        if m == 1 and a != 1:
            out.append(Violation(f"first level must be available from day 1, got day {a}", level=m))
        if a < 1 or a > days:
            out.append(Violation(f"addition day {a} of level {m} outside [1, {days}]", level=m))
        if prev is not None and a < prev:
            out.append(Violation(f"addition day {a} of level {m} precedes level {m - 1}", level=m))
        prev = a

    day_idx = spec.day_of_row()
    occ_idx = np.tile(np.arange(1, t_per_day + 1), days)
    probs = np.column_stack([spec.control_prob, spec.level_probs])
    bad_range = (probs < -1e-12) | (probs > 1 + 1e-12)
    for row, col in zip(*np.nonzero(bad_range)):
        out.append(
            Violation(
                f"probability {probs[row, col]:.6g} outside [0, 1] for level {col} "
                f"at day {day_idx[row]} occasion {occ_idx[row]}",
                day=int(day_idx[row]),
                occasion=int(occ_idx[row]),
                level=int(col),
            )
        )
    sums = probs.sum(axis=1)
    for row in np.nonzero(np.abs(sums - 1.0) > _SUM_TOL)[0]:
        out.append(
            Violation(
                f"probabilities sum to {sums[row]:.6g} at day {day_idx[row]} "
                f"occasion {occ_idx[row]}",
                day=int(day_idx[row]),
                occasion=int(occ_idx[row]),
            )
        )
    for m, a in enumerate(spec.addition_days, start=1):
        early = day_idx < a
        hot = early & (np.abs(spec.level_probs[:, m - 1]) > 1e-12)
        for row in np.nonzero(hot)[0]:
            out.append(
                Violation(
                    f"level {m} has probability {spec.level_probs[row, m - 1]:.6g} at day "
                    f"{day_idx[row]} before its addition day {a}",
                    day=int(day_idx[row]),
                    occasion=int(occ_idx[row]),
                    level=m,
                )
            )
    bad_tau = (spec.availability < -1e-12) | (spec.availability > 1 + 1e-12)
    for row in np.nonzero(bad_tau)[0]:
        out.append(
            Violation(
                f"availability {spec.availability[row]:.6g} outside [0, 1] at day {day_idx[row]}",
                day=int(day_idx[row]),
                occasion=int(occ_idx[row]),
            )
        )
    return out


def build_uniform_design(
    days: int,
    occasions_per_day: int,
    control_prob: float,
    additions: Sequence[tuple[int, int]],
    availability: AvailabilityPattern | None = None,
) -> DesignSpec:
    """Design with the active mass split equally among the available levels.

    additions lists (level count, addition day) waves; the first wave must
    start on day 1 and later waves must come strictly later. At every
    decision point each available level gets (1 - control_prob) / n_available
    and unavailable levels get 0.
    """
    if not 0 < control_prob < 1:
        raise InvalidProbability(f"control probability must lie in (0, 1), got {control_prob}")
    if days < 1 or occasions_per_day < 1:
        raise InvalidSchedule(f"study needs positive days and occasions, got {days}x{occasions_per_day}")
    if not additions:
        raise InvalidSchedule("at least one level addition wave is required")
    prev_day = None
    for count, day in additions:
        if count < 1:
            raise InvalidSchedule(f"addition wave on day {day} has no levels")
        if day < 1 or day > days:
            raise InvalidSchedule(f"addition day {day} outside [1, {days}]")
        if prev_day is None:
            if day != 1:
                raise InvalidSchedule(f"first addition wave must start on day 1, got day {day}")
        elif day <= prev_day:
            raise InvalidSchedule(f"addition days must be strictly increasing, got {day} after {prev_day}")
        prev_day = day

    addition_days: list[int] = []
    for count, day in additions:
        addition_days.extend([day] * count)
    m_total = len(addition_days)

    n = days * occasions_per_day
    day_idx = trend_mod.day_of_point(days, occasions_per_day)
    level_probs = np.zeros((n, m_total))
    active_mass = 1.0 - control_prob
    avail_count = np.zeros(n)
    for a in addition_days:
        avail_count += (day_idx >= a).astype(float)
    for m, a in enumerate(addition_days):
        on = day_idx >= a
        level_probs[on, m] = active_mass / avail_count[on]
    control = 1.0 - level_probs.sum(axis=1)

    pattern = availability or AvailabilityPattern()
    tau = pattern.values(days, occasions_per_day)
    return DesignSpec(
        days=days,
        occasions_per_day=occasions_per_day,
        addition_days=tuple(addition_days),
        control_prob=control,
        level_probs=level_probs,
        availability=tau,
        availability_pattern=pattern,
    )
