"""Trial generator and Monte Carlo estimation harness."""

import numpy as np
import pytest

from mlmrt import distributions as dist
from mlmrt.design import AvailabilityPattern, build_uniform_design
from mlmrt.estimator import build_design_matrix
from mlmrt.simulation import (
    SimulationPlan,
    estimate_coverage,
    estimate_power,
    generate_dataset,
    replicate_rng,
)
from mlmrt.trend import SHAPE_CONSTANT, SHAPE_LINEAR, SHAPE_SPLINE, EffectTrend, solve_coefficients


def small_plan(**kw):
    args = dict(
        design=build_uniform_design(14, 1, 0.6, [(3, 1)]),
        trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.2, 0.2, 0.2)),
        n=20,
        variant=dist.VARIANT_CHI,
        seed=123,
        replicates=50,
    )
    args.update(kw)
    return SimulationPlan(**args)


class TestGenerator:
    def test_deterministic_per_seed_and_replicate(self):
        plan = small_plan()
        a = generate_dataset(plan, 7)
        b = generate_dataset(plan, 7)
        assert np.array_equal(a.outcome, b.outcome)
        assert np.array_equal(a.level, b.level)
        c = generate_dataset(plan, 8)
        assert not np.array_equal(a.outcome, c.outcome)

    def test_streams_differ_across_seeds(self):
        a = generate_dataset(small_plan(seed=1), 0)
        b = generate_dataset(small_plan(seed=2), 0)
        assert not np.array_equal(a.level, b.level)

    def test_rng_is_counter_based_philox(self):
        gen = replicate_rng(5, 9)
        assert type(gen.bit_generator).__name__ == "Philox"

    def test_assignment_frequencies_match_probabilities(self):
        # 1e5 decision points; each frequency within 4 binomial SEs.
        design = build_uniform_design(100, 1, 0.6, [(2, 1), (2, 51)])
        plan = small_plan(
            design=design,
            trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.1,) * 4),
            n=1000,
        )
        ds = generate_dataset(plan, 0)
        level = ds.level.reshape(1000, 100)
        for day, expect in ((10, [0.6, 0.2, 0.2, 0.0, 0.0]), (80, [0.6, 0.1, 0.1, 0.1, 0.1])):
            counts = np.bincount(level[:, day - 1], minlength=5)
            for lv in range(5):
                p = expect[lv]
                se = np.sqrt(max(p * (1 - p), 1e-12) / 1000)
                assert abs(counts[lv] / 1000 - p) <= 4 * se + 1e-9

    def test_availability_frequency(self):
        pat = AvailabilityPattern(shape=SHAPE_LINEAR, mean=0.6, initial=0.4)
        design = build_uniform_design(50, 1, 0.6, [(2, 1)], availability=pat)
        plan = small_plan(design=design, trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.1, 0.1)), n=2000)
        ds = generate_dataset(plan, 0)
        avail = ds.available.reshape(2000, 50)
        emp = avail.mean(axis=0)
        se = np.sqrt(design.availability * (1 - design.availability) / 2000)
        assert np.all(np.abs(emp - design.availability) <= 4 * se + 1e-9)

    def test_exchangeable_correlation(self):
        plan = small_plan(n=10000, rho=0.5, sigma=2.0,
                          trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.0, 0.0, 0.0)))
        ds = generate_dataset(plan, 0)
        y = ds.outcome.reshape(10000, 14)
        resid = y - y.mean(axis=0, keepdims=True)
        cors = []
        for a in range(0, 14, 3):
            for b in range(a + 1, 14, 5):
                va = resid[:, a]
                vb = resid[:, b]
                cors.append((va * vb).mean() / (va.std() * vb.std()))
        assert abs(np.mean(cors) - 0.5) < 0.02

    def test_zero_sigma_outcomes_follow_model_exactly(self):
        plan = small_plan(sigma=1e-300)
        ds = generate_dataset(plan, 0)
        x, y, avail = build_design_matrix(ds, plan.trend, plan.q_eff, mask_unavailable=False)
        coefs = solve_coefficients(plan.trend, 14, 1, plan.design.addition_days)
        theta = np.concatenate([plan.intercept_vector, plan.sigma * coefs.reshape(-1)])
        assert np.allclose(y, np.einsum("ntp,p->nt", x, theta), atol=1e-290)

    def test_multiple_occasions_per_day_roundtrip(self):
        from mlmrt.estimator import fit

        design = build_uniform_design(10, 2, 0.6, [(2, 1)])
        trend = EffectTrend(shape=SHAPE_LINEAR, mean=(0.3, 0.2), initial=(0.05, 0.05))
        plan = SimulationPlan(design=design, trend=trend, n=200, variant=dist.VARIANT_CHI, seed=13)
        ds = generate_dataset(plan, 0)
        assert ds.occasion.max() == 2
        res = fit(ds, trend, plan.q_eff)
        truth = solve_coefficients(trend, 10, 2).reshape(-1)
        assert np.max(np.abs(res.beta_hat - truth)) < 0.5  # loose, N=200 noise

    def test_spline_generation_consistency(self):
        # Outcome at an available point equals B alpha + centered effect + eps
        # reconstructed by hand for a few records.
        design = build_uniform_design(30, 1, 0.6, [(2, 1)])
        trend = EffectTrend(shape=SHAPE_SPLINE, mean=(0.2, 0.3), initial=(0.02, 0.02), peak_day=(10.0, 10.0))
        plan = SimulationPlan(design=design, trend=trend, n=4, variant=dist.VARIANT_CHI, seed=3)
        ds = generate_dataset(plan, 1)
        x, y, _ = build_design_matrix(ds, trend, plan.q_eff, mask_unavailable=False)
        coefs = solve_coefficients(trend, 30, 1, design.addition_days)
        theta = np.concatenate([plan.intercept_vector, coefs.reshape(-1)])
        eps = y - np.einsum("ntp,p->nt", x, theta)
        outcomes = ds.outcome.reshape(4, 30)
        assert np.allclose(outcomes, y)
        assert np.std(eps) == pytest.approx(1.0, abs=0.15)


class TestEstimation:
    def test_power_estimate_deterministic(self):
        plan = small_plan(replicates=40)
        a = estimate_power(plan)
        b = estimate_power(plan)
        assert a.value == b.value
        assert a.hits == b.hits

    def test_type_one_error_near_alpha(self):
        plan = small_plan(
            trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.0, 0.0, 0.0)),
            n=40,
            replicates=400,
            seed=31,
        )
        est = estimate_power(plan)
        assert abs(est.value - 0.05) < 0.035

    def test_power_tracks_formula(self):
        plan = small_plan(n=82, replicates=300, seed=17)  # formulated power ~0.8
        est = estimate_power(plan)
        assert est.formula_value == pytest.approx(0.80, abs=0.01)
        assert abs(est.value - est.formula_value) <= 3 * est.se + 0.01

    def test_coverage_mode(self):
        plan = small_plan(
            mode="coverage",
            n=59,
            replicates=300,
            seed=19,
            trend=EffectTrend(shape=SHAPE_CONSTANT, mean=(0.25, 0.25, 0.25)),
        )
        est = estimate_coverage(plan)
        assert 0.9 <= est.value <= 1.0
        assert abs(est.value - est.formula_value) <= 0.04

    def test_mode_mismatch_raises(self):
        with pytest.raises(ValueError):
            estimate_coverage(small_plan(mode="power"))
        with pytest.raises(ValueError):
            estimate_power(small_plan(mode="coverage"))

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            small_plan(rho=1.0)
        with pytest.raises(ValueError):
            small_plan(sigma=-1.0)
        with pytest.raises(ValueError):
            small_plan(replicates=0)
