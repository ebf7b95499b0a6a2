"""
Least-squares collocation solver
"""

from .assembly import ResidualSystem, ScaleFactor, ScalingSpec, assemble
from .collocation import GLL, UNIFORM, CollocationSet, SharedEdge, make_collocation, reference_nodes
from .linalg import (
    CallableSystem, GaussNewtonDiagnostics, LinearSolution, SolveResult,
    solve, solve_gauss_newton, solve_least_squares, solve_linear,
)
from .problem import ProblemSpec

__all__ = [
    'GLL', 'UNIFORM', 'CollocationSet', 'SharedEdge', 'make_collocation', 'reference_nodes',
    'ProblemSpec', 'ResidualSystem', 'ScaleFactor', 'ScalingSpec', 'assemble',
    'CallableSystem', 'GaussNewtonDiagnostics', 'LinearSolution', 'SolveResult',
    'solve', 'solve_gauss_newton', 'solve_least_squares', 'solve_linear',
]
