"""Central and noncentral chi-square / F distributions and the T-squared map.

The noncentral CDFs are evaluated as Poisson mixtures of central kernels:
chi-square through the regularized incomplete gamma, F through the
regularized incomplete beta. The mixture is summed outward from the Poisson
mode until the un-summed weight drops below tolerance, which bounds the
truncation error since every kernel value lies in [0, 1]. Quantiles invert
the CDFs by geometric bracketing plus a bracketed root solve.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize, special

from .errors import InsufficientN, NonConvergence

_MASS_TOL = 1e-13
_MAX_TERMS = 1_000_000

VARIANT_CHI = "chi"
VARIANT_HOTELLING_NQ1 = "hotelling N-q-1"
VARIANT_HOTELLING_N1 = "hotelling N-1"
VARIANT_HOTELLING_N = "hotelling N"
VARIANTS = (VARIANT_CHI, VARIANT_HOTELLING_NQ1, VARIANT_HOTELLING_N1, VARIANT_HOTELLING_N)


def _poisson_block(half_lambda: float) -> tuple[np.ndarray, np.ndarray]:
    """Poisson(half_lambda) weights covering all but < _MASS_TOL of the mass.

    Returns (indices, weights), centered on the mode and grown outward. The
    remaining mass bounds the truncation error of any mixture of [0, 1]
    kernels. Raises NonConvergence if the window would exceed the term cap.
    """
    mode = int(half_lambda)
    # Window estimate: Poisson mass beyond ~10 standard deviations is
    # far below tolerance; grow from there if needed.
    width = int(10 * np.sqrt(half_lambda + 1.0)) + 20
    for _ in range(20):
        lo = max(0, mode - width)
        hi = mode + width
        if hi - lo > _MAX_TERMS:
            raise NonConvergence(
                f"noncentral mixture needs more than {_MAX_TERMS} terms (lambda = {2 * half_lambda:g})"
            )
        js = np.arange(lo, hi + 1)
        logw = -half_lambda + js * np.log(half_lambda) - special.gammaln(js + 1.0) \
            if half_lambda > 0 else np.where(js == 0, 0.0, -np.inf)
        w = np.exp(logw)
        deficit = 1.0 - w.sum()
        if deficit < _MASS_TOL:
            return js, w
        width *= 2
    raise NonConvergence(f"Poisson weight window failed to converge (lambda = {2 * half_lambda:g})")


def chisq_cdf(x: float, df: float) -> float:
    """Central chi-square CDF."""
    if x <= 0:
        return 0.0
    return float(special.chdtr(df, x))


def chisq_quantile(p: float, df: float) -> float:
    """Central chi-square quantile (inverse CDF)."""
    _check_prob(p)
    return float(special.chdtri(df, 1.0 - p))


def f_cdf(x: float, df1: float, df2: float) -> float:
    """Central F CDF."""
    if x <= 0:
        return 0.0
    u = df1 * x / (df1 * x + df2)
    return float(special.betainc(df1 / 2.0, df2 / 2.0, u))


def f_quantile(p: float, df1: float, df2: float) -> float:
    """Central F quantile (inverse CDF)."""
    _check_prob(p)
    return float(special.fdtri(df1, df2, p))


def nc_chisq_cdf(x: float, df: float, lam: float) -> float:
    """Noncentral chi-square CDF via the Poisson mixture of central CDFs."""
    if x <= 0:
        return 0.0
    if lam < 0:
        raise ValueError(f"noncentrality must be >= 0, got {lam}")
    if lam == 0:
        return chisq_cdf(x, df)
    js, w = _poisson_block(lam / 2.0)
    return float(np.dot(w, special.chdtr(df + 2.0 * js, x)))


def nc_chisq_sf(x: float, df: float, lam: float) -> float:
    """Noncentral chi-square survival function."""
    return 1.0 - nc_chisq_cdf(x, df, lam)


def nc_f_cdf(x: float, df1: float, df2: float, lam: float) -> float:
    """Noncentral F CDF via the Poisson mixture of incomplete-beta kernels."""
    if x <= 0:
        return 0.0
    if lam < 0:
        raise ValueError(f"noncentrality must be >= 0, got {lam}")
    u = df1 * x / (df1 * x + df2)
    if lam == 0:
        return float(special.betainc(df1 / 2.0, df2 / 2.0, u))
    js, w = _poisson_block(lam / 2.0)
    return float(np.dot(w, special.betainc(df1 / 2.0 + js, df2 / 2.0, u)))


def nc_f_sf(x: float, df1: float, df2: float, lam: float) -> float:
    """Noncentral F survival function."""
    return 1.0 - nc_f_cdf(x, df1, df2, lam)


def _invert(cdf, p: float, scale_guess: float) -> float:
    """Invert a monotone CDF by geometric bracketing plus a bracketed solve."""
    hi = max(scale_guess, 1.0)
    lo = 0.0
    for _ in range(200):
        if cdf(hi) >= p:
            break
        lo = hi
        hi *= 2.0
    else:
        raise NonConvergence(f"quantile bracket failed to cover p = {p}")
    return float(optimize.brentq(lambda t: cdf(t) - p, lo, hi, xtol=1e-12, rtol=8.9e-16, maxiter=200))


def nc_chisq_quantile(p: float, df: float, lam: float) -> float:
    """Noncentral chi-square quantile."""
    _check_prob(p)
    if lam == 0:
        return chisq_quantile(p, df)
    return _invert(lambda t: nc_chisq_cdf(t, df, lam), p, df + lam)


def nc_f_quantile(p: float, df1: float, df2: float, lam: float) -> float:
    """Noncentral F quantile."""
    _check_prob(p)
    if lam == 0:
        return f_quantile(p, df1, df2)
    return _invert(lambda t: nc_f_cdf(t, df1, df2, lam), p, 1.0 + (lam + df1) / df1)


def _check_prob(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")


def hotelling_df2(mp: int, n: int, q: int, variant: str) -> int:
    """Denominator degrees of freedom of the F map for a T-squared variant."""
    if variant == VARIANT_HOTELLING_NQ1:
        return n - q - mp
    if variant == VARIANT_HOTELLING_N1:
        return n - mp
    if variant == VARIANT_HOTELLING_N:
        return n - mp + 1
    raise ValueError(f"unknown T-squared variant {variant!r}")


def hotelling_scale(mp: int, n: int, q: int, variant: str) -> float:
    """Multiplier turning a T-squared statistic into its F statistic."""
    df2 = hotelling_df2(mp, n, q, variant)
    if variant == VARIANT_HOTELLING_NQ1:
        return df2 / (mp * (n - q - 1))
    if variant == VARIANT_HOTELLING_N1:
        return df2 / (mp * (n - 1))
    return df2 / (mp * n)


def hotelling_to_f(statistic: float, mp: int, n: int, q: int, variant: str) -> tuple[float, int, int]:
    """Map a T-squared style statistic to (f_value, df1, df2).

    variant selects the denominator degrees of freedom of the T-squared
    reference: "hotelling N-q-1", "hotelling N-1" or "hotelling N".
    Raises InsufficientN when n is too small for the implied df2.
    """
    df2 = hotelling_df2(mp, n, q, variant)
    if df2 < 1:
        raise InsufficientN(
            f"N = {n} leaves df2 = {df2} < 1 for variant {variant!r} (dimension {mp}, q = {q})"
        )
    return statistic * hotelling_scale(mp, n, q, variant), mp, df2
