"""Trend basis construction and target solving."""

import numpy as np
import pytest

from mlmrt.errors import DegenerateTrend
from mlmrt.trend import (
    SHAPE_CONSTANT,
    SHAPE_LINEAR,
    SHAPE_QUADRATIC,
    SHAPE_SPLINE,
    EffectTrend,
    basis_matrix,
    day_of_point,
    intercept_basis,
    solve_coefficients,
    time_index,
    trend_values,
    z_basis,
)


def spline(mean, initial=0.02, peak=28.0, m=1):
    return EffectTrend(
        shape=SHAPE_SPLINE, mean=(mean,) * m, initial=(initial,) * m, peak_day=(peak,) * m
    )


class TestBasis:
    def test_spline_at_start(self):
        t = spline(0.2)
        assert np.allclose(z_basis(t, 1, 1, 1, 1), [1.0, 0.0])

    def test_spline_saturates_at_peak(self):
        t = spline(0.2)
        assert np.allclose(z_basis(t, 1, 100, 1, 1), [1.0, 27.0])
        assert np.allclose(z_basis(t, 1, 28, 1, 1), [1.0, 27.0])

    def test_linear_uses_elapsed_days(self):
        t = EffectTrend(shape=SHAPE_LINEAR, mean=(0.2,), initial=(0.02,))
        assert np.allclose(z_basis(t, 1, 5, 1, 1), [1.0, 4.0])

    def test_multiple_occasions_fractional_index(self):
        assert time_index(1, 1, 3) == 0.0
        assert time_index(1, 2, 3) == pytest.approx(1 / 3)
        assert time_index(2, 1, 3) == pytest.approx(1.0)
        t = EffectTrend(shape=SHAPE_LINEAR, mean=(0.2,), initial=(0.02,))
        assert np.allclose(z_basis(t, 1, 2, 2, 3), [1.0, 4 / 3])

    def test_intercept_basis_leading_one(self):
        for q in (1, 2, 3):
            b = intercept_basis(q, 7, 1, 1)
            assert b[0] == 1.0
            assert b.shape == (q,)

    def test_quadratic_basis(self):
        t = EffectTrend(shape=SHAPE_QUADRATIC, mean=(0.2,), initial=(0.02,), peak_day=(10.0,))
        assert np.allclose(z_basis(t, 1, 4, 1, 1), [1.0, 3.0, 9.0])


class TestSolve:
    def test_constant_is_the_mean(self):
        t = EffectTrend(shape=SHAPE_CONSTANT, mean=(0.1,))
        assert np.allclose(solve_coefficients(t, 30), [[0.1]])

    def test_spline_slope_closed_form(self):
        # Sum of min(27, d-1) over 180 days is 4482, so the slope is
        # (0.2 - 0.02) * 180 / 4482. Verified by direct averaging below.
        coefs = solve_coefficients(spline(0.2), 180)
        assert coefs[0, 0] == pytest.approx(0.02)
        assert coefs[0, 1] == pytest.approx(32.4 / 4482, rel=1e-12)
        vals = trend_values(spline(0.2), coefs, 180)[0]
        assert vals.mean() == pytest.approx(0.2, abs=1e-9)
        assert vals[0] == pytest.approx(0.02, abs=1e-12)

    def test_linear_slope_closed_form(self):
        t = EffectTrend(shape=SHAPE_LINEAR, mean=(0.2,), initial=(0.02,))
        coefs = solve_coefficients(t, 14)
        assert coefs[0, 1] == pytest.approx(2 * 0.18 / 13, rel=1e-12)
        vals = trend_values(t, coefs, 14)[0]
        assert vals.mean() == pytest.approx(0.2, abs=1e-9)

    @pytest.mark.parametrize(
        "shape,peak",
        [(SHAPE_CONSTANT, None), (SHAPE_LINEAR, None), (SHAPE_SPLINE, 28.0), (SHAPE_QUADRATIC, 28.0)],
    )
    @pytest.mark.parametrize("days,occ", [(30, 1), (14, 3), (180, 1)])
    def test_targets_reproduced_for_day_one_levels(self, shape, peak, days, occ):
        mean, initial = 0.25, 0.03
        t = EffectTrend(
            shape=shape,
            mean=(mean,),
            initial=() if shape == SHAPE_CONSTANT else (initial,),
            peak_day=(peak,) if peak else (),
        )
        coefs = solve_coefficients(t, days, occ)
        vals = trend_values(t, coefs, days, occ)[0]
        assert vals.mean() == pytest.approx(mean, abs=1e-9)
        if shape != SHAPE_CONSTANT:
            assert vals[0] == pytest.approx(initial, abs=1e-9)

    def test_added_level_targets_anchor_on_addition_day(self):
        # A level joining mid-study hits its initial value on its first
        # active day and its mean over its own active window.
        t = spline(0.2, peak=118.0, m=1)
        coefs = solve_coefficients(t, 180, addition_days=[91])
        vals = trend_values(t, coefs, 180)[0]
        day = day_of_point(180, 1)
        assert vals[day == 91][0] == pytest.approx(0.02, abs=1e-9)
        assert vals[day >= 91].mean() == pytest.approx(0.2, abs=1e-9)

    def test_spline_nondecreasing_then_flat(self):
        coefs = solve_coefficients(spline(0.2), 180)
        vals = trend_values(spline(0.2), coefs, 180)[0]
        assert np.all(np.diff(vals) >= -1e-12)
        assert np.allclose(vals[27:], vals[27], atol=1e-12)

    def test_quadratic_derivative_vanishes_at_peak(self):
        t = EffectTrend(shape=SHAPE_QUADRATIC, mean=(0.2,), initial=(0.02,), peak_day=(28.0,))
        coefs = solve_coefficients(t, 60)[0]
        s_star = 27.0
        h = 1e-4
        up = coefs @ np.array([1.0, s_star + h, (s_star + h) ** 2])
        dn = coefs @ np.array([1.0, s_star - h, (s_star - h) ** 2])
        assert abs(up - dn) / (2 * h) < 1e-6

    def test_spline_peak_beyond_study_is_plain_linear(self):
        t_spline = spline(0.2, peak=28.0)
        t_linear = EffectTrend(shape=SHAPE_LINEAR, mean=(0.2,), initial=(0.02,))
        c_spline = solve_coefficients(t_spline, 14)
        c_linear = solve_coefficients(t_linear, 14)
        assert np.allclose(c_spline, c_linear)

    def test_degenerate_spline_raises(self):
        # Plateau on day 1 leaves no slope to meet a different mean.
        with pytest.raises(DegenerateTrend):
            solve_coefficients(spline(0.2, peak=1.0), 30)

    def test_degenerate_spline_constant_targets_ok(self):
        coefs = solve_coefficients(spline(0.1, initial=0.1, peak=1.0), 30)
        assert np.allclose(coefs, [[0.1, 0.0]])

    def test_never_active_level_raises(self):
        with pytest.raises(DegenerateTrend):
            solve_coefficients(spline(0.2, peak=40.0), 10, addition_days=[11])


class TestValidation:
    def test_requires_known_shape(self):
        with pytest.raises(ValueError):
            EffectTrend(shape="cubic", mean=(0.1,))

    def test_requires_matching_lengths(self):
        with pytest.raises(ValueError):
            EffectTrend(shape=SHAPE_LINEAR, mean=(0.1, 0.2), initial=(0.02,))
        with pytest.raises(ValueError):
            EffectTrend(shape=SHAPE_SPLINE, mean=(0.1,), initial=(0.02,), peak_day=())

    def test_basis_matrix_shapes(self):
        t = spline(0.2, m=2)
        assert basis_matrix(t, 1, 20, 1).shape == (20, 2)
        assert basis_matrix(t, 2, 20, 2).shape == (40, 2)
