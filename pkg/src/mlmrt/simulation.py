"""Monte Carlo trial generator and empirical power / coverage estimation.

One replicate draws availability indicators, level assignments, and
exchangeable normal errors, builds outcomes from the working model, fits the
estimator, and applies the chosen test. Replicates use independent
counter-based random streams keyed by (seed, replicate index), so results
are reproducible and independent of any execution order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import distributions as dist
from . import engine as power_mod
from .design import DesignSpec
from .errors import MlmrtError
from .estimator import TrialDataset, build_design_matrix, fit
from .trend import EffectTrend, solve_coefficients

_FAILURE_BUDGET = 0.01


@dataclass(frozen=True)
class SimulationPlan:
    """Everything needed to reproduce a Monte Carlo run."""

    design: DesignSpec
    trend: EffectTrend
    n: int
    variant: str
    mode: str = "power"  # "power" or "coverage"
    precision: EffectTrend | None = None  # coverage target, defaults to trend
    q: int | None = None
    intercept: tuple[float, ...] | None = None  # alpha coefficients, default all ones
    sigma: float = 1.0
    rho: float = 0.0
    sig_level: float = 0.05
    replicates: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.replicates < 1:
            raise ValueError("at least one replicate is required")
        if self.mode not in ("power", "coverage"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def q_eff(self) -> int:
        return self.trend.p if self.q is None else self.q

    @property
    def intercept_vector(self) -> np.ndarray:
        if self.intercept is None:
            return np.ones(self.q_eff)
        v = np.asarray(self.intercept, dtype=float)
        if v.shape != (self.q_eff,):
            raise ValueError(f"intercept: expected {self.q_eff} coefficients, got {v.shape}")
        return v


@dataclass(frozen=True)
class SimulationEstimate:
    value: float
    se: float
    hits: int
    replicates: int
    failures: int
    runtime_s: float
    formula_value: float

    @property
    def discrepancy(self) -> float:
        return self.value - self.formula_value


def replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    """Independent stream for one replicate: Philox keyed by (seed, index)."""
    key = np.array([seed, replicate_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_dataset(plan: SimulationPlan, replicate_index: int) -> TrialDataset:
    """One synthetic trial: availability, assignments, errors, outcomes.

    Assignment uses a single uniform draw per decision point mapped against
    the cumulative level probabilities, active levels first in id order and
    the control level taking the remaining mass.
    """
    rng = replicate_rng(plan.seed, replicate_index)
    design = plan.design
    n = plan.n
    n_pts = design.n_time_points

    avail = (rng.random((n, n_pts)) < design.availability[None, :]).astype(np.int64)
    u = rng.random((n, n_pts))
    cum = np.cumsum(design.level_probs, axis=1)  # (DT, M)
    level = (u[:, :, None] >= np.concatenate([np.zeros((n_pts, 1)), cum[:, :-1]], axis=1)[None]).sum(
        axis=2
    ) * (u < cum[:, -1][None, :])

    shared = rng.standard_normal((n, 1))
    idio = rng.standard_normal((n, n_pts))
    eps = plan.sigma * (np.sqrt(plan.rho) * shared + np.sqrt(1.0 - plan.rho) * idio)

    day_grid = np.repeat(np.arange(1, design.days + 1), design.occasions_per_day)
    occ_grid = np.tile(np.arange(1, design.occasions_per_day + 1), design.days)
    dataset = TrialDataset(
        design=design,
        participants=tuple(range(n)),
        participant=np.repeat(np.arange(n), n_pts),
        day=np.tile(day_grid, n),
        occasion=np.tile(occ_grid, n),
        available=avail.reshape(-1),
        level=level.reshape(-1).astype(np.int64),
        outcome=np.zeros(n * n_pts),
    )
    # Outcomes from the same model-matrix construction the estimator uses.
    x, _, _ = build_design_matrix(dataset, plan.trend, plan.q_eff, mask_unavailable=False)
    coefs = solve_coefficients(plan.trend, design.days, design.occasions_per_day, design.addition_days)
    theta = np.concatenate([plan.intercept_vector, plan.sigma * coefs.reshape(-1)])
    y = np.einsum("ntp,p->nt", x, theta) + eps
    return replace(dataset, outcome=y.reshape(-1))


def _coverage_threshold(plan: SimulationPlan) -> float:
    precision = plan.precision or plan.trend
    return power_mod.noncentrality(plan.design, precision, plan.n)


def estimate_power(plan: SimulationPlan) -> SimulationEstimate:
    """Empirical rejection rate of the chosen test across replicates."""
    if plan.mode != "power":
        raise ValueError("plan is not in power mode")
    mp = plan.design.n_levels * plan.trend.p
    q = plan.q_eff
    if plan.variant == dist.VARIANT_CHI:
        crit = dist.chisq_quantile(1.0 - plan.sig_level, mp)
    else:
        df2 = dist.hotelling_df2(mp, plan.n, q, plan.variant)
        crit = dist.f_quantile(1.0 - plan.sig_level, mp, df2) / dist.hotelling_scale(
            mp, plan.n, q, plan.variant
        )
    q_info = power_mod.build_Q(plan.design, plan.trend)
    formula = power_mod.power(plan.design, plan.trend, plan.n, plan.sig_level, plan.variant, q)

    t0 = time.perf_counter()
    hits = 0
    failures = 0
    done = 0
    for r in range(plan.replicates):
        try:
            res = fit(generate_dataset(plan, r), plan.trend, q)
            if plan.variant == dist.VARIANT_CHI:
                delta_hat = res.beta_hat / res.sigma_bar
                stat = plan.n * delta_hat @ q_info.matrix @ delta_hat
            else:
                stat = res.statistic
        except MlmrtError:
            failures += 1
            continue
        except np.linalg.LinAlgError:
            failures += 1
            continue
        if not np.isfinite(stat):
            failures += 1
            continue
        done += 1
        hits += stat > crit
    _check_failures(failures, plan.replicates)
    value = hits / done
    return SimulationEstimate(
        value=value,
        se=float(np.sqrt(value * (1.0 - value) / done)),
        hits=hits,
        replicates=done,
        failures=failures,
        runtime_s=time.perf_counter() - t0,
        formula_value=formula,
    )


def estimate_coverage(plan: SimulationPlan) -> SimulationEstimate:
    """Fraction of replicates whose estimation error stays inside the target.

    The error quadratic form N (beta_hat - beta)' Sigma^-1 (beta_hat - beta)
    is compared against the precision quadratic form N Delta' Q Delta, the
    chi-square variant plugging in the design information matrix and the
    T-squared variants the small-sample covariance estimate.
    """
    if plan.mode != "coverage":
        raise ValueError("plan is not in coverage mode")
    precision = plan.precision or plan.trend
    q = plan.q_eff
    threshold = _coverage_threshold(plan)
    q_info = power_mod.build_Q(plan.design, plan.trend)
    formula = power_mod.coverage(plan.design, precision, plan.n, plan.sig_level, plan.variant, q)
    coefs = solve_coefficients(
        plan.trend, plan.design.days, plan.design.occasions_per_day, plan.design.addition_days
    )
    beta_true = plan.sigma * coefs.reshape(-1)

    t0 = time.perf_counter()
    hits = 0
    failures = 0
    done = 0
    for r in range(plan.replicates):
        try:
            res = fit(generate_dataset(plan, r), plan.trend, q)
            err = res.beta_hat - beta_true
            if plan.variant == dist.VARIANT_CHI:
                stat = plan.n * (err / res.sigma_bar) @ q_info.matrix @ (err / res.sigma_bar)
            else:
                stat = plan.n * err @ np.linalg.solve(res.cov_beta_small, err)
        except MlmrtError:
            failures += 1
            continue
        except np.linalg.LinAlgError:
            failures += 1
            continue
        if not np.isfinite(stat):
            failures += 1
            continue
        done += 1
        hits += stat <= threshold
    _check_failures(failures, plan.replicates)
    value = hits / done
    return SimulationEstimate(
        value=value,
        se=float(np.sqrt(value * (1.0 - value) / done)),
        hits=hits,
        replicates=done,
        failures=failures,
        runtime_s=time.perf_counter() - t0,
        formula_value=formula,
    )


def estimate(plan: SimulationPlan) -> SimulationEstimate:
    """Dispatch on the plan's mode."""
    return estimate_power(plan) if plan.mode == "power" else estimate_coverage(plan)


def _check_failures(failures: int, replicates: int) -> None:
    if failures > _FAILURE_BUDGET * replicates:
        raise RuntimeError(
            f"{failures} of {replicates} replicates failed to fit; "
            "the configuration is too small or degenerate to simulate"
        )
