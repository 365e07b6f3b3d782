"""Boundary integral solvers for Helmholtz Neumann problems in the plane."""

from ._kernels import BACKEND
from .distcalc import DensityPair, DtNOperator, SchauderMinusOne, build_dtn
from .geometry import Boundary, area_quadrature, make_boundary
from .layerpot import NystromOperator, SolutionField, assemble, eval_field, jump_check
from .solver import NeumannProblem, SolveReport, eigen_scan, neumann_eigenfunction, solve_neumann
from .specfun import FundamentalSolution, SeriesParams, fundamental_value, hankel1

__all__ = [
    "BACKEND", "Boundary", "DensityPair", "DtNOperator", "FundamentalSolution", "NeumannProblem",
    "NystromOperator", "SchauderMinusOne", "SeriesParams", "SolutionField", "SolveReport",
    "area_quadrature", "assemble", "build_dtn", "eigen_scan", "eval_field", "fundamental_value",
    "hankel1", "jump_check", "make_boundary", "neumann_eigenfunction", "solve_neumann",
]
__version__ = "0.1.0"
