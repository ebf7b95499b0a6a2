"""
Benchmark catalog, error metrics, runs and sweeps
"""

from .cases import ExactSolution, ProblemCase, SideCondition, get_case, list_cases
from .metrics import constraint_residual, fit_rate, l2_error, linf_error
from .report import read_csv, write_csv
from .runner import ConvergenceReport, RunRecord, run_case, sweep

__all__ = [
    'ExactSolution', 'ProblemCase', 'SideCondition', 'get_case', 'list_cases',
    'constraint_residual', 'fit_rate', 'l2_error', 'linf_error',
    'read_csv', 'write_csv', 'ConvergenceReport', 'RunRecord', 'run_case', 'sweep',
]
