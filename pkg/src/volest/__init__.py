"""Simulation and drift estimation for scalar diffusions whose noise
amplitude is modulated by a second stochastic factor.

The state follows dX = theta * a(X) dt + sigma1(X) * sigma2(Y) dW where Y is
an autonomous diffusion (possibly correlated with W).  The package simulates
the coupled pair with a left-point Euler scheme, computes the closed-form
maximum-likelihood estimator of theta from a discretised path, and analyses,
through the scale function of Y, whether that estimator is strongly
consistent as the horizon grows.
"""

from .errors import (
    ConfigError,
    DegenerateCorrelationError,
    DegenerateVolatilityError,
    DomainError,
    ExperimentError,
    NoInformationError,
    QuadratureError,
    SimulationError,
    UnsupportedDataError,
    VolestError,
)
from .models import (
    CheckResult,
    CoefFn,
    ModelSpec,
    TimeGrid,
    ValidationReport,
    VolatilityModel,
    linear_spec,
    spec_from_config,
    spec_to_config,
    validate_spec,
)
from .simulate import (
    EPS_DOMAIN,
    NoiseStream,
    PathPair,
    coarsen,
    correlate,
    dump_path_csv,
    euler_pair,
    load_path_csv,
    simulate_pair,
    wiener_increments,
)
from .estimate import (
    ESTIMATE_CSV_HEADER,
    EstimateResult,
    estimate_theta,
    estimate_theta_linear,
    f_g_eval,
    martingale_ratio,
)
from .scale import (
    A6_CASES,
    ScaleReport,
    adaptive_simpson,
    boundary_scale_values,
    classify_a6,
    default_c,
    ellipticity_margin,
    noise_quadratic_form,
    scale_density,
    scale_form,
    scale_function,
)
from .harness import (
    DEFAULT_HORIZONS,
    DEFAULT_N_PATHS,
    DEFAULT_SEED,
    DEFAULT_STEP,
    DEFAULT_THETA,
    EXPERIMENT_CONFIG_KEYS,
    ExperimentConfig,
    HorizonSummary,
    McSummary,
    TABLE1_IDS,
    collect_estimates,
    consistency_curve,
    curve_csv_lines,
    experiment_from_config,
    experiment_to_config,
    run_experiment,
    summarize,
    sweep_csv_lines,
    table1_spec,
    table1_sweep,
    worker_count,
)

__version__ = "0.1.0"

__all__ = [
    "A6_CASES",
    "CheckResult",
    "CoefFn",
    "ConfigError",
    "DEFAULT_HORIZONS",
    "DEFAULT_N_PATHS",
    "DEFAULT_SEED",
    "DEFAULT_STEP",
    "DEFAULT_THETA",
    "DegenerateCorrelationError",
    "DegenerateVolatilityError",
    "DomainError",
    "EPS_DOMAIN",
    "ESTIMATE_CSV_HEADER",
    "EXPERIMENT_CONFIG_KEYS",
    "EstimateResult",
    "ExperimentConfig",
    "ExperimentError",
    "HorizonSummary",
    "McSummary",
    "ModelSpec",
    "NoInformationError",
    "NoiseStream",
    "PathPair",
    "QuadratureError",
    "ScaleReport",
    "SimulationError",
    "TABLE1_IDS",
    "TimeGrid",
    "UnsupportedDataError",
    "ValidationReport",
    "VolatilityModel",
    "VolestError",
    "adaptive_simpson",
    "boundary_scale_values",
    "classify_a6",
    "coarsen",
    "collect_estimates",
    "consistency_curve",
    "correlate",
    "curve_csv_lines",
    "default_c",
    "dump_path_csv",
    "ellipticity_margin",
    "estimate_theta",
    "estimate_theta_linear",
    "euler_pair",
    "experiment_from_config",
    "experiment_to_config",
    "f_g_eval",
    "linear_spec",
    "load_path_csv",
    "martingale_ratio",
    "noise_quadratic_form",
    "run_experiment",
    "scale_density",
    "scale_form",
    "scale_function",
    "simulate_pair",
    "spec_from_config",
    "spec_to_config",
    "summarize",
    "sweep_csv_lines",
    "table1_spec",
    "table1_sweep",
    "validate_spec",
    "wiener_increments",
    "worker_count",
]
