"""Design model: uniform builder, invariant validation, availability patterns."""

import numpy as np
import pytest

from mlmrt.design import AvailabilityPattern, DesignSpec, build_uniform_design, validate
from mlmrt.errors import InvalidProbability, InvalidSchedule
from mlmrt.trend import SHAPE_LINEAR, SHAPE_QUADRATIC, SHAPE_SPLINE


def two_wave_design():
    return build_uniform_design(180, 1, 0.6, [(2, 1), (2, 91)])


class TestUniformBuilder:
    def test_two_wave_split(self):
        d = two_wave_design()
        assert np.allclose(d.level_probs[:90], [0.2, 0.2, 0.0, 0.0])
        assert np.allclose(d.level_probs[90:], [0.1, 0.1, 0.1, 0.1])
        assert np.allclose(d.control_prob, 0.6)
        assert d.addition_days == (1, 1, 91, 91)

    def test_single_level_even_split(self):
        d = build_uniform_design(10, 1, 0.5, [(1, 1)])
        assert np.allclose(d.control_prob, 0.5)
        assert np.allclose(d.level_probs, 0.5)

    def test_three_levels_quarter_each(self):
        # Control and each of the three levels all get probability 0.25.
        d = build_uniform_design(45, 1, 0.25, [(3, 1)])
        assert np.allclose(d.level_probs, 0.25)
        assert np.allclose(d.control_prob, 0.25)

    def test_rows_sum_to_one_exactly(self):
        for d in (two_wave_design(), build_uniform_design(45, 2, 0.75, [(3, 1)])):
            total = d.control_prob + d.level_probs.sum(axis=1)
            assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_builder_output_validates(self):
        assert validate(two_wave_design()) == []

    def test_addition_days_do_not_change_earlier_rows(self):
        base = build_uniform_design(100, 1, 0.6, [(2, 1), (1, 40)])
        moved = build_uniform_design(100, 1, 0.6, [(2, 1), (1, 70)])
        assert np.allclose(base.level_probs[:39], moved.level_probs[:39])

    def test_bad_control_prob(self):
        with pytest.raises(InvalidProbability):
            build_uniform_design(10, 1, 0.0, [(2, 1)])
        with pytest.raises(InvalidProbability):
            build_uniform_design(10, 1, 1.0, [(2, 1)])

    def test_bad_schedule(self):
        with pytest.raises(InvalidSchedule):
            build_uniform_design(10, 1, 0.6, [])
        with pytest.raises(InvalidSchedule):
            build_uniform_design(10, 1, 0.6, [(2, 2)])  # first wave not on day 1
        with pytest.raises(InvalidSchedule):
            build_uniform_design(10, 1, 0.6, [(2, 1), (1, 11)])  # beyond study end
        with pytest.raises(InvalidSchedule):
            build_uniform_design(10, 1, 0.6, [(2, 1), (1, 5), (1, 5)])  # not increasing


class TestValidate:
    def test_sum_violation_located(self):
        d = two_wave_design()
        probs = d.level_probs.copy()
        probs[0] = [0.3, 0.3, 0.0, 0.0]
        bad = DesignSpec(
            days=d.days,
            occasions_per_day=1,
            addition_days=d.addition_days,
            control_prob=d.control_prob,
            level_probs=probs,
            availability=d.availability,
        )
        violations = validate(bad)
        assert any("sum to 1.2" in str(v) and v.day == 1 for v in violations)

    def test_premature_level_named(self):
        d = two_wave_design()
        probs = d.level_probs.copy()
        control = d.control_prob.copy()
        probs[10, 3] = 0.1
        control[10] -= 0.1
        bad = DesignSpec(
            days=d.days,
            occasions_per_day=1,
            addition_days=d.addition_days,
            control_prob=control,
            level_probs=probs,
            availability=d.availability,
        )
        violations = validate(bad)
        assert any(v.level == 4 and v.day == 11 and "before its addition day" in str(v) for v in violations)

    def test_availability_range_checked(self):
        d = build_uniform_design(5, 1, 0.6, [(1, 1)])
        bad = DesignSpec(
            days=5,
            occasions_per_day=1,
            addition_days=(1,),
            control_prob=d.control_prob,
            level_probs=d.level_probs,
            availability=np.array([1.0, 1.0, 1.2, 1.0, 1.0]),
        )
        assert any("availability" in str(v) for v in validate(bad))


class TestAvailabilityPattern:
    def test_constant_default_is_full(self):
        tau = AvailabilityPattern().values(20, 1)
        assert np.allclose(tau, 1.0)

    @pytest.mark.parametrize(
        "shape,peak",
        [(SHAPE_LINEAR, None), (SHAPE_SPLINE, 10.0), (SHAPE_QUADRATIC, 15.0)],
    )
    def test_mean_and_initial_hit(self, shape, peak):
        pat = AvailabilityPattern(shape=shape, mean=0.7, initial=0.5, peak_day=peak)
        tau = pat.values(30, 1)
        assert tau.mean() == pytest.approx(0.7, abs=1e-9)
        assert tau[0] == pytest.approx(0.5, abs=1e-9)
        assert tau.min() >= 0.0 and tau.max() <= 1.0

    def test_infeasible_pair_raises(self):
        pat = AvailabilityPattern(shape=SHAPE_LINEAR, mean=0.9, initial=0.1)
        with pytest.raises(InvalidProbability):
            pat.values(200, 1)  # the line would exceed 1 long before day 200
