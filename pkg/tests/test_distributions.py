"""Distribution layer tests: oracles, reductions, round trips, orderings."""

import numpy as np
import pytest
from scipy import integrate, special, stats

from mlmrt import distributions as dist
from mlmrt.errors import InsufficientN, NonConvergence

# Frozen oracle values, computed by adaptive quadrature of the Bessel-form
# density (noncentral chi-square) and by nesting that CDF over a central
# chi-square weight (noncentral F). Cross-checked against 1e7-draw Monte
# Carlo within 3 standard errors.
NCX2_ORACLE = 0.643301014130674  # nc_chisq_cdf(10, 6, 3)
NCF_ORACLE = 0.589064256382923  # nc_f_cdf(2, 6, 20, 5)


def ncx2_cdf_quadrature(x, df, lam):
    """Independent route: integrate the Bessel-function form of the density."""

    def pdf(t):
        h = df / 2.0 - 1.0
        s = np.sqrt(lam * t)
        return 0.5 * np.exp(-(t + lam) / 2.0 + s) * (t / lam) ** (h / 2.0) * special.ive(h, s)

    v, _ = integrate.quad(pdf, 0, x, limit=400, epsabs=1e-13, epsrel=1e-13)
    return v


class TestNoncentralChisq:
    def test_zero_lambda_reduces_to_central(self):
        for x in (0.5, 3.0, 12.0):
            for df in (1, 4, 9):
                assert dist.nc_chisq_cdf(x, df, 0.0) == pytest.approx(
                    stats.chi2.cdf(x, df), abs=1e-12
                )

    def test_cdf_near_half_at_mean(self):
        assert 0.4 < dist.nc_chisq_cdf(6 + 3.0, 6, 3.0) < 0.6

    def test_frozen_oracle_value(self):
        assert dist.nc_chisq_cdf(10.0, 6, 3.0) == pytest.approx(NCX2_ORACLE, abs=1e-10)

    def test_quadrature_oracle_recomputes_frozen_value(self):
        assert ncx2_cdf_quadrature(10.0, 6, 3.0) == pytest.approx(NCX2_ORACLE, abs=1e-12)

    @pytest.mark.parametrize("df", [1, 3, 6, 12])
    @pytest.mark.parametrize("lam", [0.3, 2.0, 9.0, 40.0])
    def test_grid_against_quadrature(self, df, lam):
        xs = np.linspace(0.3, df + lam + 4 * np.sqrt(2 * df + 4 * lam), 13)
        for x in xs:
            assert dist.nc_chisq_cdf(x, df, lam) == pytest.approx(
                ncx2_cdf_quadrature(x, df, lam), abs=1e-8
            )

    def test_monotone_in_x_and_limits(self):
        xs = np.linspace(0.0, 80.0, 60)
        vals = [dist.nc_chisq_cdf(x, 5, 7.0) for x in xs]
        assert vals[0] == 0.0
        assert vals[-1] > 1 - 1e-6
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_stochastically_increasing_in_lambda(self):
        for x in (2.0, 8.0, 20.0):
            lams = [0.0, 1.0, 4.0, 16.0, 64.0]
            vals = [dist.nc_chisq_cdf(x, 4, lam) for lam in lams]
            assert all(b <= a + 1e-14 for a, b in zip(vals, vals[1:]))

    def test_quantile_roundtrip(self):
        for df in (2, 6):
            for lam in (0.0, 3.0, 25.0):
                for p in (0.05, 0.5, 0.95):
                    q = dist.nc_chisq_quantile(p, df, lam)
                    assert dist.nc_chisq_cdf(q, df, lam) == pytest.approx(p, abs=1e-8)

    def test_huge_lambda_raises_nonconvergence(self):
        with pytest.raises(NonConvergence):
            dist.nc_chisq_cdf(1e13, 4, 1e13)


class TestNoncentralF:
    def test_zero_lambda_reduces_to_central(self):
        for x in (0.4, 1.0, 3.5):
            assert dist.nc_f_cdf(x, 3, 11, 0.0) == pytest.approx(stats.f.cdf(x, 3, 11), abs=1e-12)

    def test_central_quantile_roundtrip(self):
        q = dist.f_quantile(0.95, 3, 10)
        assert dist.nc_f_cdf(q, 3, 10, 0.0) == pytest.approx(0.95, abs=1e-9)

    def test_frozen_oracle_value(self):
        assert dist.nc_f_cdf(2.0, 6, 20, 5.0) == pytest.approx(NCF_ORACLE, abs=1e-9)

    def test_nested_quadrature_recomputes_frozen_value(self):
        def inner(y):
            return ncx2_cdf_quadrature(6 * 2.0 * y / 20, 6, 5.0) * stats.chi2.pdf(y, 20)

        v, _ = integrate.quad(inner, 0, np.inf, limit=400, epsabs=1e-11, epsrel=1e-11)
        assert v == pytest.approx(NCF_ORACLE, abs=1e-9)

    @pytest.mark.parametrize("df1,df2", [(2, 8), (6, 14), (8, 3)])
    @pytest.mark.parametrize("lam", [0.5, 6.0, 22.0])
    def test_grid_against_scipy(self, df1, df2, lam):
        # scipy uses an unrelated implementation (Boost), a second route
        # besides the quadrature oracle above.
        for x in np.linspace(0.2, 9.0, 12):
            assert dist.nc_f_cdf(x, df1, df2, lam) == pytest.approx(
                stats.ncf.cdf(x, df1, df2, lam), abs=1e-8
            )

    def test_monotone_and_limits(self):
        xs = np.linspace(0.0, 200.0, 80)
        vals = [dist.nc_f_cdf(x, 4, 9, 11.0) for x in xs]
        assert vals[0] == 0.0
        assert vals[-1] > 1 - 1e-4
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_stochastically_increasing_in_lambda(self):
        for x in (0.8, 2.0, 5.0):
            vals = [dist.nc_f_cdf(x, 5, 12, lam) for lam in (0.0, 2.0, 8.0, 32.0)]
            assert all(b <= a + 1e-14 for a, b in zip(vals, vals[1:]))

    def test_quantile_roundtrip(self):
        for lam in (0.0, 4.0, 18.0):
            for p in (0.1, 0.5, 0.9):
                q = dist.nc_f_quantile(p, 4, 16, lam)
                assert dist.nc_f_cdf(q, 4, 16, lam) == pytest.approx(p, abs=1e-8)

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            dist.nc_f_quantile(1.2, 3, 9, 1.0)
        with pytest.raises(ValueError):
            dist.nc_chisq_cdf(1.0, 3, -0.5)


class TestHotellingMap:
    def test_dimension_one_variant_n_is_identity(self):
        f, df1, df2 = dist.hotelling_to_f(7.3, 1, 25, 1, dist.VARIANT_HOTELLING_N)
        assert df1 == 1 and df2 == 25
        assert f == pytest.approx(7.3)

    def test_scale_example(self):
        f, df1, df2 = dist.hotelling_to_f(10.0, 6, 20, 1, dist.VARIANT_HOTELLING_NQ1)
        assert (df1, df2) == (6, 13)
        assert f == pytest.approx(10.0 * 13 / 108)

    def test_variant_ordering_follows_scales(self):
        c, mp, n, q = 10.0, 6, 30, 2
        fs = {}
        for variant in (dist.VARIANT_HOTELLING_NQ1, dist.VARIANT_HOTELLING_N1, dist.VARIANT_HOTELLING_N):
            fs[variant] = dist.hotelling_to_f(c, mp, n, q, variant)[0]
        scales = {v: dist.hotelling_scale(mp, n, q, v) for v in fs}
        order_by_f = sorted(fs, key=fs.get)
        order_by_scale = sorted(scales, key=scales.get)
        assert order_by_f == order_by_scale

    def test_insufficient_n(self):
        with pytest.raises(InsufficientN):
            dist.hotelling_to_f(5.0, 6, 8, 2, dist.VARIANT_HOTELLING_NQ1)
