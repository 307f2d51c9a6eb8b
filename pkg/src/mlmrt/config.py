"""Run configuration: the single JSON schema shared by CLI, service and UI.

A config document mirrors the calculator's R-style argument names (days,
occ_per_day, aa_day_aa, prob or control_prob, beta_*, tau_*, sigma, rho,
pow, sigLev, method, test, result, SS). Parsing validates every field with
a field-path error message, expands the uniform-design shorthand into an
explicit probability matrix, and yields the domain objects the engine
consumes. For the precision method the beta_* targets are read as the
precision targets, matching the calculator's argument reuse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from . import distributions as dist
from . import engine as power_mod
from . import trend as trend_mod
from .design import AvailabilityPattern, DesignSpec, build_uniform_design, validate
from .errors import ConfigError, InvalidProbability, InvalidSchedule

ENGINE_VERSION = "0.1.0"

RESULT_SAMPLE_SIZE = "choice_sample_size"
RESULT_POWER = "choice_power"
RESULT_COVERAGE = "choice_coverage_probability"
RESULTS = (RESULT_SAMPLE_SIZE, RESULT_POWER, RESULT_COVERAGE)

METHOD_POWER = "power"
METHOD_PRECISION = "confidence interval"
METHODS = (METHOD_POWER, METHOD_PRECISION)

_KNOWN_KEYS = {
    "days", "occ_per_day", "aa_day_aa", "prob", "control_prob",
    "beta_shape", "beta_mean", "beta_initial", "beta_quadratic_max",
    "tau_shape", "tau_mean", "tau_initial", "tau_quadratic_max",
    "sigma", "rho", "pow", "sigLev", "method", "test", "result", "SS",
    "q", "replicates", "seed",
}


@dataclass(frozen=True)
class RunConfig:
    design: DesignSpec
    trend: trend_mod.EffectTrend
    q: int
    method: str
    variant: str
    result: str
    power_target: float
    sig_level: float
    sigma: float
    rho: float
    ss: int | None
    replicates: int
    seed: int
    has_targets: bool
    uniform_control: float | None  # set when the shorthand was used


def _fail(path: str, message: str):
    raise ConfigError(path, message)


def _get_int(doc, key, default=None, minimum=None):
    if key not in doc:
        if default is None:
            _fail(key, "required")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and float(v).is_integer():
            v = int(v)
        else:
            _fail(key, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(key, f"must be >= {minimum}, got {v}")
    return v


def _get_number(doc, key, default=None, lo=None, hi=None, lo_open=False, hi_open=False):
    if key not in doc:
        if default is None:
            _fail(key, "required")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, f"expected a number, got {v!r}")
    v = float(v)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        _fail(key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        _fail(key, f"must be {'<' if hi_open else '<='} {hi}, got {v}")
    return v


def _get_choice(doc, key, choices, default=None):
    if key not in doc:
        if default is None:
            _fail(key, "required")
        return default
    v = doc[key]
    if v not in choices:
        _fail(key, f"expected one of {list(choices)}, got {v!r}")
    return v


def _get_vector(doc, key, length, default=None, required=True):
    """Scalar-or-list field broadcast to one entry per level."""
    if key not in doc:
        if not required:
            return default
        _fail(key, "required")
    v = doc[key]
    if isinstance(v, bool):
        _fail(key, f"expected a number or list, got {v!r}")
    if isinstance(v, (int, float)):
        return [float(v)] * length
    if not isinstance(v, list):
        _fail(key, f"expected a number or list, got {type(v).__name__}")
    if len(v) != length:
        _fail(key, f"expected {length} entries (one per level), got {len(v)}")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            _fail(f"{key}[{i}]", f"expected a number, got {item!r}")
        out.append(float(item))
    return out


def _parse_prob_matrix(doc, n_points, m_levels):
    raw = doc["prob"]
    if isinstance(raw, dict):
        extra = set(raw) - {"levels", "rows"}
        if extra:
            _fail("prob", f"unknown keys {sorted(extra)}")
        levels = raw.get("levels")
        if levels != list(range(m_levels + 1)):
            _fail("prob.levels", f"expected {list(range(m_levels + 1))}, got {levels}")
        raw = raw.get("rows")
    if not isinstance(raw, list) or len(raw) != n_points:
        got = len(raw) if isinstance(raw, list) else type(raw).__name__
        _fail("prob", f"expected {n_points} rows (days x occasions), got {got}")
    mat = np.empty((n_points, m_levels + 1))
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != m_levels + 1:
            _fail(f"prob[{r}]", f"expected {m_levels + 1} columns (control first), got "
                  f"{len(row) if isinstance(row, list) else type(row).__name__}")
        for c, item in enumerate(row):
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                _fail(f"prob[{r}][{c}]", f"expected a number, got {item!r}")
            mat[r, c] = float(item)
    return mat


def _availability(doc, days, occ) -> AvailabilityPattern:
    shape = _get_choice(doc, "tau_shape", trend_mod.SHAPES, default=trend_mod.SHAPE_CONSTANT)
    mean = _get_number(doc, "tau_mean", default=1.0, lo=0.0, hi=1.0)
    initial = None
    if "tau_initial" in doc:
        initial = _get_number(doc, "tau_initial", lo=0.0, hi=1.0)
    peak = None
    if "tau_quadratic_max" in doc:
        peak = _get_number(doc, "tau_quadratic_max", lo=1.0)
    if shape != trend_mod.SHAPE_CONSTANT and initial is None:
        _fail("tau_initial", f"required for tau_shape {shape!r}")
    if shape in (trend_mod.SHAPE_SPLINE, trend_mod.SHAPE_QUADRATIC) and peak is None:
        _fail("tau_quadratic_max", f"required for tau_shape {shape!r}")
    return AvailabilityPattern(shape=shape, mean=mean, initial=initial, peak_day=peak)


def parse_config(doc: Any, require_targets: bool = True) -> RunConfig:
    """Validate a config document and build the engine's domain objects.

    With require_targets=False (the analyze pipeline) the beta targets may
    be omitted; the trend then only fixes the basis shape.
    """
    if not isinstance(doc, dict):
        _fail("$", f"expected a JSON object, got {type(doc).__name__}")
    for key in doc:
        if key not in _KNOWN_KEYS:
            _fail(key, "unknown key")

    days = _get_int(doc, "days", minimum=1)
    occ = _get_int(doc, "occ_per_day", default=1, minimum=1)
    n_points = days * occ

    aa = doc.get("aa_day_aa")
    if aa is None:
        _fail("aa_day_aa", "required")
    if isinstance(aa, (int, float)) and not isinstance(aa, bool):
        aa = [aa]
    if not isinstance(aa, list) or not aa:
        _fail("aa_day_aa", "expected a non-empty list of addition days, one per level")
    addition_days = []
    for i, d in enumerate(aa):
        if isinstance(d, bool) or not isinstance(d, (int, float)) or float(d) != int(d):
            _fail(f"aa_day_aa[{i}]", f"expected an integer day, got {d!r}")
        addition_days.append(int(d))
    m_levels = len(addition_days)

    if ("prob" in doc) == ("control_prob" in doc):
        _fail("prob", "provide exactly one of prob or control_prob")

    pattern = _availability(doc, days, occ)
    try:
        tau = pattern.values(days, occ)
    except InvalidProbability as exc:
        _fail("tau_mean", str(exc))

    uniform_control = None
    if "control_prob" in doc:
        uniform_control = _get_number(doc, "control_prob", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
        waves = []
        for d in dict.fromkeys(addition_days):
            waves.append((addition_days.count(d), d))
        try:
            design = build_uniform_design(days, occ, uniform_control, waves, availability=pattern)
        except (InvalidProbability, InvalidSchedule) as exc:
            _fail("aa_day_aa", str(exc))
    else:
        mat = _parse_prob_matrix(doc, n_points, m_levels)
        design = DesignSpec(
            days=days,
            occasions_per_day=occ,
            addition_days=tuple(addition_days),
            control_prob=mat[:, 0],
            level_probs=mat[:, 1:],
            availability=tau,
            availability_pattern=pattern,
        )
        violations = validate(design)
        if violations:
            head = "; ".join(str(v) for v in violations[:3])
            more = f" (+{len(violations) - 3} more)" if len(violations) > 3 else ""
            _fail("prob", head + more)

    shape = _get_choice(doc, "beta_shape", trend_mod.SHAPES)
    has_targets = "beta_mean" in doc
    if require_targets and not has_targets:
        _fail("beta_mean", "required")
    mean = _get_vector(doc, "beta_mean", m_levels, default=[0.0] * m_levels, required=require_targets)
    needs_initial = shape != trend_mod.SHAPE_CONSTANT and require_targets
    initial = _get_vector(
        doc, "beta_initial", m_levels, default=[0.0] * m_levels, required=needs_initial
    )
    peaks = None
    if shape in (trend_mod.SHAPE_SPLINE, trend_mod.SHAPE_QUADRATIC):
        peaks = _get_vector(doc, "beta_quadratic_max", m_levels)
        for i, (pk, a) in enumerate(zip(peaks, design.addition_days)):
            if pk <= a:
                _fail(
                    f"beta_quadratic_max[{i}]",
                    f"peak day {pk:g} must come after level {i + 1}'s addition day {a}",
                )
    try:
        eff_trend = trend_mod.EffectTrend(
            shape=shape,
            mean=tuple(mean),
            initial=tuple(initial) if shape != trend_mod.SHAPE_CONSTANT else (),
            peak_day=tuple(peaks) if peaks is not None else (),
        )
    except ValueError as exc:
        _fail("beta_shape", str(exc))

    sigma = _get_number(doc, "sigma", default=1.0, lo=0.0, lo_open=True)
    rho = _get_number(doc, "rho", default=0.0, lo=0.0, hi=1.0, hi_open=True)
    power_target = _get_number(doc, "pow", default=0.8, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    sig_level = _get_number(doc, "sigLev", default=0.05, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    method = _get_choice(doc, "method", METHODS, default=METHOD_POWER)
    variant = _get_choice(doc, "test", dist.VARIANTS)
    result = _get_choice(doc, "result", RESULTS, default=RESULT_SAMPLE_SIZE)
    if result == RESULT_POWER and method != METHOD_POWER:
        _fail("result", f"{RESULT_POWER!r} requires method {METHOD_POWER!r}")
    if result == RESULT_COVERAGE and method != METHOD_PRECISION:
        _fail("result", f"{RESULT_COVERAGE!r} requires method {METHOD_PRECISION!r}")
    ss = None
    if "SS" in doc:
        ss = _get_int(doc, "SS", minimum=1)
    if result in (RESULT_POWER, RESULT_COVERAGE) and ss is None:
        _fail("SS", f"required when result is {result!r}")
    q = _get_int(doc, "q", default=eff_trend.p, minimum=1)
    replicates = _get_int(doc, "replicates", default=1000, minimum=1)
    seed = _get_int(doc, "seed", default=0, minimum=0)

    return RunConfig(
        design=design,
        trend=eff_trend,
        q=q,
        method=method,
        variant=variant,
        result=result,
        power_target=power_target,
        sig_level=sig_level,
        sigma=sigma,
        rho=rho,
        ss=ss,
        replicates=replicates,
        seed=seed,
        has_targets=has_targets,
        uniform_control=uniform_control,
    )


def resolved(cfg: RunConfig) -> dict:
    """Canonical echo of a parsed config; parsing it again reproduces cfg."""
    design = cfg.design
    doc: dict[str, Any] = {
        "days": design.days,
        "occ_per_day": design.occasions_per_day,
        "aa_day_aa": list(design.addition_days),
        "prob": {
            "levels": list(range(design.n_levels + 1)),
            "rows": np.column_stack([design.control_prob, design.level_probs]).tolist(),
        },
        "beta_shape": cfg.trend.shape,
        "beta_mean": list(cfg.trend.mean),
        "sigma": cfg.sigma,
        "rho": cfg.rho,
        "pow": cfg.power_target,
        "sigLev": cfg.sig_level,
        "method": cfg.method,
        "test": cfg.variant,
        "result": cfg.result,
        "q": cfg.q,
        "replicates": cfg.replicates,
        "seed": cfg.seed,
    }
    if cfg.trend.shape != trend_mod.SHAPE_CONSTANT:
        doc["beta_initial"] = list(cfg.trend.initial)
    if cfg.trend.peak_day:
        doc["beta_quadratic_max"] = list(cfg.trend.peak_day)
    pattern = design.availability_pattern
    if pattern is not None:
        doc["tau_shape"] = pattern.shape
        doc["tau_mean"] = pattern.mean
        if pattern.initial is not None:
            doc["tau_initial"] = pattern.initial
        if pattern.peak_day is not None:
            doc["tau_quadratic_max"] = pattern.peak_day
    if cfg.ss is not None:
        doc["SS"] = cfg.ss
    return doc


def _percent(x: float) -> str:
    return f"{x * 100:g}%"


def run_query(cfg: RunConfig) -> dict:
    """Execute the configured sizing or evaluation query.

    Returns a report embedding the resolved config, the numeric results and
    a sentence-form message. Raises InsufficientN / NoSolution for
    infeasible queries and ConfigError for semantic config problems.
    """
    if not cfg.has_targets:
        raise ConfigError("beta_mean", "required to run a sizing or evaluation query")
    out: dict[str, Any] = {}
    if cfg.result == RESULT_SAMPLE_SIZE:
        if cfg.method == METHOD_POWER:
            res = power_mod.sample_size_power(
                cfg.design, cfg.trend, cfg.sig_level, cfg.power_target, cfg.variant, q=cfg.q
            )
            out["N"] = res.n
            out["P"] = res.achieved
            message = (
                f"The required sample size is {res.n} to attain {_percent(cfg.power_target)} "
                f"power when the significance level is {cfg.sig_level:g}."
            )
        else:
            res = power_mod.sample_size_precision(
                cfg.design, cfg.trend, cfg.sig_level, cfg.variant, q=cfg.q
            )
            out["N"] = res.n
            out["CP"] = res.achieved
            message = (
                f"The required sample size is {res.n} to attain "
                f"{_percent(1 - cfg.sig_level)} coverage probability when the significance "
                f"level is {cfg.sig_level:g}."
            )
        out["noncentrality"] = res.noncentrality
        out["df1"] = res.df1
        out["df2"] = res.df2
    elif cfg.result == RESULT_POWER:
        value = power_mod.power(cfg.design, cfg.trend, cfg.ss, cfg.sig_level, cfg.variant, q=cfg.q)
        out["P"] = value
        message = (
            f"The sample size {cfg.ss} gives {round(value * 100)}% power when the "
            f"significance level is {cfg.sig_level:g}"
        )
    else:
        value = power_mod.coverage(cfg.design, cfg.trend, cfg.ss, cfg.sig_level, cfg.variant, q=cfg.q)
        out["CP"] = value
        message = (
            f"The sample size {cfg.ss} gives {round(value * 100)}% coverage probability "
            f"when the significance level is {cfg.sig_level:g}"
        )

    coefs = trend_mod.solve_coefficients(
        cfg.trend, cfg.design.days, cfg.design.occasions_per_day, cfg.design.addition_days
    )
    q_info = power_mod.build_Q(cfg.design, cfg.trend)
    return {
        "config": resolved(cfg),
        "result": out,
        "message": message,
        "delta": coefs.tolist(),
        "Sig_delta_inv": q_info.matrix.tolist(),
        "engine_version": ENGINE_VERSION,
    }


def run_curve(cfg: RunConfig, n_min: int, n_max: int) -> dict:
    """Power or coverage over an N range for plotting."""
    if not cfg.has_targets:
        raise ConfigError("beta_mean", "required to compute a curve")
    if n_min < 1 or n_max < n_min:
        raise ConfigError("nmin", f"need 1 <= nmin <= nmax, got [{n_min}, {n_max}]")
    if n_max - n_min > 5000:
        raise ConfigError("nmax", "curve range is capped at 5000 points")
    metric = "power" if cfg.method == METHOD_POWER else "coverage"
    pts = power_mod.value_curve(
        cfg.design, cfg.trend, cfg.sig_level, cfg.variant, cfg.method, n_min, n_max, q=cfg.q
    )
    return {
        "config": resolved(cfg),
        "metric": metric,
        "points": [{"n": n, "value": v} for n, v in pts],
        "engine_version": ENGINE_VERSION,
    }
