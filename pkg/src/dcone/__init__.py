"""Shapes of d-cone minimizers: the linear obstacle problem, the nonlinear
elastica above an obstacle on the sphere, and the sheet-energy limit."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DconeError,
    DomainError,
    InvalidCurveError,
    RegimeError,
    ResolutionError,
)
from .elastica import SolverConfig, SolveReport, minimize, sweep_epsilon
from .linear_problem import global_minimizer_search, solve_one_fold
from .recovery import energy_E0, energy_Eh, recovery_convergence
from .sphere_curve import DiscreteCurve, bending_energy, geodesic_curvature

__all__ = [
    "ConvergenceError",
    "DconeError",
    "DiscreteCurve",
    "DomainError",
    "InvalidCurveError",
    "RegimeError",
    "ResolutionError",
    "SolveReport",
    "SolverConfig",
    "bending_energy",
    "energy_E0",
    "energy_Eh",
    "geodesic_curvature",
    "global_minimizer_search",
    "minimize",
    "recovery_convergence",
    "solve_one_fold",
    "sweep_epsilon",
]
