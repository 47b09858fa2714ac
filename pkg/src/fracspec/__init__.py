"""Spectral Galerkin solvers for ``-(p D^a u + q D^{a*} u) + d u' = h`` on (-1, 1)."""

from .assembly import AssembledSystem, SchemeId, assemble
from .errors import (AssemblyError, FracspecError, ParameterError, ShapeError,
                     SingularityError, SolverError, StructuralError)
from .kernels import BACKEND
from .numerics import (NumericalSolution, condition_number, fit_growth, fit_rate, l2_error,
                       problem_error, solve_problem)
from .problems import CATALOG, ProblemSpec, catalog_problem

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem", "AssemblyError", "BACKEND", "CATALOG", "FracspecError",
    "NumericalSolution", "ParameterError", "ProblemSpec", "SchemeId", "ShapeError",
    "SingularityError", "SolverError", "StructuralError", "assemble", "catalog_problem",
    "condition_number", "fit_growth", "fit_rate", "l2_error", "problem_error", "solve_problem",
]
