"""Multiderivative Runge-Kutta time integration with compact approximate
Taylor (CAT) flux derivatives for 1D hyperbolic conservation laws."""
from .cat import DivergedError
from .problems import PROBLEM_IDS, get_problem
from .solver import RunResult, SolverConfig, run
from .stability import amplification, critical_cfl, max_amplification
from .stencils import float_stencil, stencil_coefficients
from .tableaux import MDRK_SCHEMES, SCHEME_IDS, get_tableau, stability_polynomial

__all__ = [
    "DivergedError", "PROBLEM_IDS", "get_problem", "RunResult", "SolverConfig", "run",
    "amplification", "critical_cfl", "max_amplification", "float_stencil",
    "stencil_coefficients", "MDRK_SCHEMES", "SCHEME_IDS", "get_tableau", "stability_polynomial",
]
__version__ = "0.1.0"
