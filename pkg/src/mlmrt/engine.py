"""Design information matrix, power and coverage maps, and sample size solvers.

The information matrix Q aggregates, over every decision point, the centered
assignment covariance of the active levels scaled by availability. In
standardized effect units the asymptotic covariance of the effect estimate
is Q^-1, so the test statistic's noncentrality is N * delta' Q delta. Power
inverts that map against a noncentral chi-square or F reference; coverage
evaluates the central reference at the precision quadratic form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .design import DesignSpec
from .errors import InsufficientN, NoSolution, SingularQ
from .trend import EffectTrend, basis_matrix, solve_coefficients

_CONDITION_CAP = 1e12


@dataclass(frozen=True)
class EffectCovariance:
    """Q with its inverse (the standardized effect covariance) and diagnostics."""

    matrix: np.ndarray
    inverse: np.ndarray
    block_size: int
    n_levels: int
    condition: float

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SizingResult:
    """Minimal sample size with the value achieved there."""

    n: int
    achieved: float
    target: float
    variant: str
    method: str
    noncentrality: float
    df1: int
    df2: int | None
    iterations: int


def build_Q(design: DesignSpec, trend: EffectTrend) -> EffectCovariance:
    """Assemble Q = sum over decision points of tau * K (x) Z Z'.

    Block (m, m) of K is pi_m (1 - pi_m), block (m, m') is -pi_m pi_m'.
    Levels contribute nothing before their addition day because their
    probability is zero there.
    """
    m_levels = design.n_levels
    if trend.n_levels != m_levels:
        raise ValueError(
            f"trend has {trend.n_levels} levels but design has {m_levels}"
        )
    p = trend.p
    tau = design.availability
    pis = design.level_probs
    zs = [basis_matrix(trend, m + 1, design.days, design.occasions_per_day) for m in range(m_levels)]
    q = np.empty((m_levels * p, m_levels * p))
    for m in range(m_levels):
        for mm in range(m, m_levels):
            if m == mm:
                w = tau * pis[:, m] * (1.0 - pis[:, m])
            else:
                w = -tau * pis[:, m] * pis[:, mm]
            block = np.einsum("t,tp,tr->pr", w, zs[m], zs[mm])
            q[m * p : (m + 1) * p, mm * p : (mm + 1) * p] = block
            if mm != m:
                q[mm * p : (mm + 1) * p, m * p : (m + 1) * p] = block.T
    cond = float(np.linalg.cond(q))
    if not np.isfinite(cond) or cond > _CONDITION_CAP:
        for m in range(m_levels):
            blk = q[m * p : (m + 1) * p, m * p : (m + 1) * p]
            blk_cond = np.linalg.cond(blk) if blk.any() else np.inf
            if not np.isfinite(blk_cond) or blk_cond > _CONDITION_CAP:
                raise SingularQ(
                    f"information matrix is singular: level {m + 1} receives too little "
                    f"probability mass to identify {p} coefficients",
                    level=m + 1,
                )
        raise SingularQ(f"information matrix condition {cond:.3g} exceeds {_CONDITION_CAP:g}")
    return EffectCovariance(
        matrix=q,
        inverse=np.linalg.inv(q),
        block_size=p,
        n_levels=m_levels,
        condition=cond,
    )


def effect_quadratic(design: DesignSpec, trend: EffectTrend) -> float:
    """delta' Q delta for the design's solved standardized effect vector."""
    coefs = solve_coefficients(trend, design.days, design.occasions_per_day, design.addition_days)
    delta = coefs.reshape(-1)
    q = build_Q(design, trend)
    return float(delta @ q.matrix @ delta)


def noncentrality(design: DesignSpec, trend: EffectTrend, n: int) -> float:
    """Noncentrality of the test statistic at sample size n: n * delta' Q delta."""
    return n * effect_quadratic(design, trend)


def df_floor(mp: int, q: int, variant: str) -> int:
    """Smallest n at which the variant's reference distribution is defined."""
    if variant == dist.VARIANT_CHI:
        return 1
    # df2 is linear in n; the floor solves df2(n) >= 1.
    return max(1, 1 - dist.hotelling_df2(mp, 0, q, variant))


def solver_floor(mp: int, q: int, variant: str) -> int:
    """Search floor for sizing: df floor, but never below mp + 1.

    mp + 1 participants are the least that let the small-sample covariance
    estimate be inverted, so sizes below that are not usable in practice.
    """
    return max(df_floor(mp, q, variant), mp + 1)


def _check_n(mp: int, q: int, variant: str, n: int) -> None:
    floor = df_floor(mp, q, variant)
    if n < floor:
        raise InsufficientN(
            f"N = {n} is below the df floor {floor} for variant {variant!r} "
            f"(dimension {mp}, q = {q})"
        )


def power(
    design: DesignSpec,
    trend: EffectTrend,
    n: int,
    alpha: float,
    variant: str,
    q: int | None = None,
) -> float:
    """Rejection probability at sample size n under the solved trend."""
    q = trend.p if q is None else q
    mp = design.n_levels * trend.p
    _check_n(mp, q, variant, n)
    lam = noncentrality(design, trend, n)
    if variant == dist.VARIANT_CHI:
        crit = dist.chisq_quantile(1.0 - alpha, mp)
        return dist.nc_chisq_sf(crit, mp, lam)
    df2 = dist.hotelling_df2(mp, n, q, variant)
    crit = dist.f_quantile(1.0 - alpha, mp, df2)
    return dist.nc_f_sf(crit, mp, df2, lam)


def coverage(
    design: DesignSpec,
    precision: EffectTrend,
    n: int,
    alpha: float,
    variant: str,
    q: int | None = None,
) -> float:
    """Probability the estimation error stays inside the precision target.

    Evaluated as the central reference CDF at the scaled quadratic form
    s(n) * n * Delta' Q Delta, where s is the variant's T-squared to F scale
    (1 for the chi-square variant).
    """
    q = precision.p if q is None else q
    mp = design.n_levels * precision.p
    _check_n(mp, q, variant, n)
    x = noncentrality(design, precision, n)
    if variant == dist.VARIANT_CHI:
        return dist.chisq_cdf(x, mp)
    df2 = dist.hotelling_df2(mp, n, q, variant)
    return dist.f_cdf(dist.hotelling_scale(mp, n, q, variant) * x, mp, df2)


def _solve_minimal_n(value_at, floor: int, target: float, n_cap: int) -> tuple[int, int]:
    """Minimal integer n >= floor with value_at(n) >= target.

    Doubling bracket plus integer bisection, then a downward scan as a
    safeguard against any local non-monotonicity near the solution.
    """
    evals = 0

    def f(n: int) -> float:
        nonlocal evals
        evals += 1
        return value_at(n)

    if f(floor) >= target:
        return floor, evals
    lo, hi = floor, floor
    while True:
        hi = min(max(2 * hi, floor + 1), n_cap)
        if f(hi) >= target:
            break
        lo = hi
        if hi >= n_cap:
            raise NoSolution(
                f"no sample size up to {n_cap} reaches the target {target:g}; "
                "the effect or precision target is too small"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) >= target:
            hi = mid
        else:
            lo = mid
    n = hi
    while n - 1 >= floor and f(n - 1) >= target:
        n -= 1
    return n, evals


def sample_size_power(
    design: DesignSpec,
    trend: EffectTrend,
    alpha: float,
    target_power: float,
    variant: str,
    q: int | None = None,
    n_cap: int = 1_000_000,
) -> SizingResult:
    """Minimal N whose power reaches the target."""
    if not alpha < target_power < 1:
        raise ValueError(f"target power must lie in ({alpha}, 1), got {target_power}")
    q = trend.p if q is None else q
    mp = design.n_levels * trend.p
    unit = effect_quadratic(design, trend)
    floor = solver_floor(mp, q, variant)

    def value_at(n: int) -> float:
        lam = n * unit
        if variant == dist.VARIANT_CHI:
            crit = dist.chisq_quantile(1.0 - alpha, mp)
            return dist.nc_chisq_sf(crit, mp, lam)
        df2 = dist.hotelling_df2(mp, n, q, variant)
        crit = dist.f_quantile(1.0 - alpha, mp, df2)
        return dist.nc_f_sf(crit, mp, df2, lam)

    n, evals = _solve_minimal_n(value_at, floor, target_power, n_cap)
    df2 = None if variant == dist.VARIANT_CHI else dist.hotelling_df2(mp, n, q, variant)
    return SizingResult(
        n=n,
        achieved=value_at(n),
        target=target_power,
        variant=variant,
        method="power",
        noncentrality=n * unit,
        df1=mp,
        df2=df2,
        iterations=evals,
    )


def sample_size_precision(
    design: DesignSpec,
    precision: EffectTrend,
    alpha: float,
    variant: str,
    q: int | None = None,
    n_cap: int = 1_000_000,
) -> SizingResult:
    """Minimal N whose coverage probability reaches 1 - alpha."""
    q = precision.p if q is None else q
    mp = design.n_levels * precision.p
    unit = effect_quadratic(design, precision)
    floor = solver_floor(mp, q, variant)
    target = 1.0 - alpha

    def value_at(n: int) -> float:
        x = n * unit
        if variant == dist.VARIANT_CHI:
            return dist.chisq_cdf(x, mp)
        df2 = dist.hotelling_df2(mp, n, q, variant)
        return dist.f_cdf(dist.hotelling_scale(mp, n, q, variant) * x, mp, df2)

    n, evals = _solve_minimal_n(value_at, floor, target, n_cap)
    df2 = None if variant == dist.VARIANT_CHI else dist.hotelling_df2(mp, n, q, variant)
    return SizingResult(
        n=n,
        achieved=value_at(n),
        target=target,
        variant=variant,
        method="confidence interval",
        noncentrality=n * unit,
        df1=mp,
        df2=df2,
        iterations=evals,
    )


def value_curve(
    design: DesignSpec,
    trend: EffectTrend,
    alpha: float,
    variant: str,
    method: str,
    n_min: int,
    n_max: int,
    q: int | None = None,
) -> list[tuple[int, float]]:
    """(N, power) or (N, coverage) pairs over an N range, for plotting."""
    q_eff = trend.p if q is None else q
    mp = design.n_levels * trend.p
    floor = df_floor(mp, q_eff, variant)
    fn = power if method == "power" else coverage
    out = []
    for n in range(max(n_min, floor), n_max + 1):
        out.append((n, fn(design, trend, n, alpha, variant, q)))
    return out
