"""Design and analysis toolkit for multi-level micro-randomized trials."""

from .config import ENGINE_VERSION as __version__
from .config import RunConfig, parse_config, resolved, run_curve, run_query
from .design import AvailabilityPattern, DesignSpec, Violation, build_uniform_design, validate
from .distributions import (
    VARIANT_CHI,
    VARIANT_HOTELLING_N,
    VARIANT_HOTELLING_N1,
    VARIANT_HOTELLING_NQ1,
    VARIANTS,
    chisq_cdf,
    chisq_quantile,
    f_cdf,
    f_quantile,
    hotelling_to_f,
    nc_chisq_cdf,
    nc_chisq_quantile,
    nc_chisq_sf,
    nc_f_cdf,
    nc_f_quantile,
    nc_f_sf,
)
from .estimator import (
    FitResult,
    TestResult,
    TrialDataset,
    build_design_matrix,
    fit,
    fit_report,
    read_dataset_csv,
    test,
    write_dataset_csv,
)
from .engine import (
    EffectCovariance,
    SizingResult,
    build_Q,
    coverage,
    effect_quadratic,
    noncentrality,
    power,
    sample_size_power,
    sample_size_precision,
    value_curve,
)
from .simulation import (
    SimulationEstimate,
    SimulationPlan,
    estimate,
    estimate_coverage,
    estimate_power,
    generate_dataset,
    replicate_rng,
)
from .trend import (
    SHAPE_CONSTANT,
    SHAPE_LINEAR,
    SHAPE_QUADRATIC,
    SHAPE_SPLINE,
    SHAPES,
    EffectTrend,
    intercept_basis,
    solve_coefficients,
    z_basis,
)

__all__ = [name for name in dir() if not name.startswith("_")]
