"""Shooting methods for Caputo fractional terminal value problems."""

from __future__ import annotations

from .errors import (
    DegenerateSecantError,
    EstimationError,
    FracShootError,
    MetricError,
    MittagLefflerAccuracyError,
    MittagLefflerDomainError,
    NewtonConvergenceError,
    NumericalError,
    RhsError,
    StrategyError,
    UnknownProblemError,
    ValidationError,
)
from .history import direct_history_sum, history_sum, lagged_convolution
from .ivp import FractionalIVP, Mesh, SolverConfig, Trajectory, extend_solution, solve_ivp
from .mlf import MlfRequest, MlfResult, mittag_leffler, mittag_leffler_array
from .problems import CatalogProblem, catalog, max_error
from .proportionality import (
    LQuotientScan,
    ProportionalityEstimate,
    Strategy,
    choose_c_hat,
    proportionality_bounds,
    scan_l_bounds,
)
from .shooting import (
    FractionalTVP,
    ShootingConfig,
    ShootingReport,
    first_guess,
    second_guess,
    secant_guess,
    shoot_bisection,
    shoot_proportional_secting,
)
from .weights import ConvolutionWeights, Method, adams_weights, flmm_weights

__version__ = "0.1.0"

__all__ = [
    "CatalogProblem",
    "ConvolutionWeights",
    "DegenerateSecantError",
    "EstimationError",
    "FracShootError",
    "FractionalIVP",
    "FractionalTVP",
    "LQuotientScan",
    "Mesh",
    "Method",
    "MetricError",
    "MittagLefflerAccuracyError",
    "MittagLefflerDomainError",
    "MlfRequest",
    "MlfResult",
    "NewtonConvergenceError",
    "NumericalError",
    "ProportionalityEstimate",
    "RhsError",
    "ShootingConfig",
    "ShootingReport",
    "SolverConfig",
    "Strategy",
    "StrategyError",
    "Trajectory",
    "UnknownProblemError",
    "ValidationError",
    "adams_weights",
    "catalog",
    "choose_c_hat",
    "direct_history_sum",
    "extend_solution",
    "first_guess",
    "flmm_weights",
    "history_sum",
    "lagged_convolution",
    "max_error",
    "mittag_leffler",
    "mittag_leffler_array",
    "proportionality_bounds",
    "scan_l_bounds",
    "second_guess",
    "secant_guess",
    "shoot_bisection",
    "shoot_proportional_secting",
    "solve_ivp",
]
