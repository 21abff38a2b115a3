"""Backoff collision-resolution analysis for saturated random-access networks.

Thin Python surface over the C++ core: fixed-point throughput solutions,
delay-tail classification, countdown pmf machinery, a slotted simulator and
empirical tail statistics.
"""

from ._backlab import (
    DEFAULT_SEED,
    BackoffSpec,
    ClassificationError,
    ConfigError,
    FitError,
    FixedPointSolution,
    InsufficientDataError,
    ModelError,
    PhyProfile,
    SimResult,
    StageStats,
    asymptotic_pc,
    ccdf,
    classify_tail,
    countdown_moments,
    fairness,
    gamma_limit,
    growth_factor,
    hill_estimate,
    lambda_pmf,
    lerch_phi,
    lighttail_fit,
    loglog_slope,
    moment_finite,
    pb_moment_lower_bound,
    powerlaw_slope,
    simulate,
    solve,
    sweep,
    variance_growth,
    window,
)

__all__ = [
    "DEFAULT_SEED",
    "BackoffSpec",
    "ClassificationError",
    "ConfigError",
    "FitError",
    "FixedPointSolution",
    "InsufficientDataError",
    "ModelError",
    "PhyProfile",
    "SimResult",
    "StageStats",
    "asymptotic_pc",
    "ccdf",
    "classify_tail",
    "countdown_moments",
    "fairness",
    "gamma_limit",
    "growth_factor",
    "hill_estimate",
    "lambda_pmf",
    "lerch_phi",
    "lighttail_fit",
    "loglog_slope",
    "moment_finite",
    "pb_moment_lower_bound",
    "powerlaw_slope",
    "simulate",
    "solve",
    "sweep",
    "variance_growth",
    "window",
]

__version__ = "0.1.0"
