"""Adaptive smoothing spline estimation for function-on-function regression."""

from adass._core import (
    AdassError,
    AdassFitResult,
    BasisSystem,
    CoefficientSurface,
    CvPlan,
    DesignMatrices,
    EstimatorSettings,
    FunctionalSample,
    GenConfig,
    McAggregate,
    McRow,
    PenaltySystem,
    RegressionData,
    Scenario,
    SmoothFitResult,
    SubIntervalGrid,
    TuningPoint,
    center,
    default_breakpoint_grids,
    derive_seed,
    estimate_sn,
    fit_adass,
    fit_adass_auto,
    fit_smooth,
    fit_smooth_cv,
    gen_covariates,
    gen_response,
    initial_derivatives,
    ise,
    l2_norm_sq_sum,
    load_csv,
    load_surface,
    make_design,
    pmse,
    predict,
    product_integral,
    project,
    run_monte_carlo,
    save_surface,
    subtract_mean,
    synth_response,
    trapezoid_weights,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
