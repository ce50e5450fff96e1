"""Parametric and semiparametric Bayesian stochastic-volatility estimation."""
from .chain import Chain, ChainConfig, ChainState, ChainSummary, chain_summary, kde_mode, run_chain
from .density import (
    DegenerateSampleError,
    KernelDensity,
    bandwidth_default,
    kde_fit,
    kde_fit_residuals,
    kde_logpdf,
    kde_pdf,
    standardize,
)
from .metrics import VolMetrics, mae, mape, param_mse, srmse, vol_metrics
from .model import (
    PAPER_PARAMS,
    VOLATILITY_PARAMS,
    ErrorKind,
    ErrorSpec,
    IngestionError,
    ModelParams,
    NonStationaryError,
    Priors,
    SimulatedPath,
    draw_error,
    log_returns,
    simulate_path,
)
from .pipeline import (
    FitResult,
    ReplicationReport,
    Scenario,
    c_star_sweep,
    fit_models,
    fit_two_stage,
    replicate,
    residuals,
    run_replication,
    sample_size_sweep,
    scenario_preset,
)
from .rng import derive, make_rng
from .samplers import TargetKind, TargetSpec

__version__ = "0.1.0"
