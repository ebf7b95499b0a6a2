"""
Least-Squares Solvers
Pivoted-QR linear least squares with an iterative fallback, and damped Gauss-Newton for nonlinear residuals
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import lsqr

from ..config import GaussNewtonConfig, LeastSquaresConfig
from ..exceptions import ConvergenceError, ModeError, ShapeError

logger = logging.getLogger(__name__)


__all__ = [
    'LinearSolution', 'GaussNewtonDiagnostics', 'SolveResult', 'CallableSystem',
    'solve_least_squares', 'solve_linear', 'solve_gauss_newton', 'solve',
]

DIRECT = 'qr'
MIN_NORM = 'gelsy'
ITERATIVE = 'lsqr'


@dataclass
class LinearSolution:
    """Result of min ||H θ - S||"""
    theta: np.ndarray
    residual_norm: float
    rank: int
    cond_est: float
    method: str


@dataclass
class GaussNewtonDiagnostics:
    """Per-iteration trace of a Gauss-Newton solve"""
    iterations: int = 0
    residual_norms: List[float] = field(default_factory=list)
    step_norms: List[float] = field(default_factory=list)
    halvings: List[int] = field(default_factory=list)
    converged: bool = False
    reason: str = ''
    cond_est: float = float('nan')

    def to_dict(self) -> dict:
        return {
            'iterations': self.iterations,
            'residual_norms': list(self.residual_norms),
            'step_norms': list(self.step_norms),
            'halvings': list(self.halvings),
            'converged': self.converged,
            'reason': self.reason,
        }


@dataclass
class SolveResult:
    """Solution of a residual system by whichever path its affine flag selects"""
    theta: np.ndarray
    residual_norm: float
    cond_est: float
    method: str
    diagnostics: Optional[GaussNewtonDiagnostics] = None


@dataclass
class CallableSystem:
    """Residual system given by plain callables r(θ) and J(θ)"""
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    n_cols: int
    affine: bool = False


def solve_least_squares(H, S, config: LeastSquaresConfig = LeastSquaresConfig()) -> LinearSolution:
    """
    Minimum-norm least-squares solution of H θ ≈ S

    Args:
        H: (rows, cols) matrix
        S: (rows,) right-hand side
        config: Rank tolerance and iterative fallback settings

    Returns:
        LinearSolution
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    S = np.asarray(S, dtype=float).ravel()
    m, n = H.shape
    if S.size != m:
        raise ShapeError(f"Right-hand side has length {S.size}, matrix has {m} rows")
    if n == 0:
        return LinearSolution(np.zeros(0), float(np.linalg.norm(S)), 0, 1.0, DIRECT)

    if m > config.direct_limit or n > config.direct_limit:
        logger.warning(f"System {m}x{n} above direct limit {config.direct_limit}; using lsqr")
        result = lsqr(H, S, atol=config.lsqr_atol, btol=config.lsqr_btol, iter_lim=config.lsqr_iter_lim)
        theta, acond = result[0], result[6]
        return LinearSolution(theta, float(np.linalg.norm(H @ theta - S)), n, float(acond), ITERATIVE)

    Q, R, P = linalg.qr(H, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return LinearSolution(np.zeros(n), float(np.linalg.norm(S)), 0, float('inf'), DIRECT)

    rank = int(np.sum(diag > config.rank_rtol * diag[0]))
    cond_est = float(diag[0] / diag[-1]) if diag[-1] > 0 else float('inf')

    if rank == n:
        theta = np.empty(n)
        theta[P] = linalg.solve_triangular(R[:n, :n], Q.T @ S)
        method = DIRECT
    else:
        logger.warning(f"Rank-deficient system: rank {rank} of {n} columns; using minimum-norm solve")
        theta = linalg.lstsq(H, S, cond=config.rank_rtol, lapack_driver='gelsy')[0]
        method = MIN_NORM

    residual_norm = float(np.linalg.norm(H @ theta - S))
    logger.debug(f"Least squares {m}x{n}: rank {rank}, cond ~ {cond_est:.3e}, residual {residual_norm:.3e}")
    return LinearSolution(theta, residual_norm, rank, cond_est, method)


def solve_linear(system, config: LeastSquaresConfig = LeastSquaresConfig()) -> LinearSolution:
    """Least-squares solution of an affine residual system r(θ) = H θ - S"""
    if not system.affine:
        raise ModeError("solve_linear needs an affine system; use solve_gauss_newton")
    H, S = system.linear_system()
    return solve_least_squares(H, S, config)


def _norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def solve_gauss_newton(system, theta0=None, config: GaussNewtonConfig = GaussNewtonConfig(),
                       lsq_config: LeastSquaresConfig = LeastSquaresConfig()):
    """
    Damped Gauss-Newton iteration for min ||r(θ)||

    Args:
        system: Object with residual(θ), jacobian(θ) and n_cols
        theta0: Starting point (zeros when None)
        config: Iteration limits, tolerances and damping
        lsq_config: Settings for the linearized step solve

    Returns:
        (θ, GaussNewtonDiagnostics)

    Raises:
        ConvergenceError: residual grew on divergence_patience consecutive iterations
    """
    theta = np.zeros(system.n_cols) if theta0 is None else np.array(theta0, dtype=float)
    if theta.size != system.n_cols:
        raise ShapeError(f"Starting point has length {theta.size}, system has {system.n_cols} columns")

    r = system.residual(theta)
    norm = _norm(r)
    diag = GaussNewtonDiagnostics(residual_norms=[norm])
    growth = 0

    for it in range(1, config.max_iter + 1):
        if norm <= config.tol_residual:
            diag.converged, diag.reason = True, 'residual'
            break

        J = system.jacobian(theta)
        gradient = _norm(J.T @ r)
        if gradient <= config.tol_gradient * max(_norm(J), 1e-300) * norm:
            diag.converged, diag.reason = True, 'gradient'
            break

        step_solution = solve_least_squares(J, -r, lsq_config)
        diag.cond_est = step_solution.cond_est
        step = step_solution.theta

        t, halvings = 1.0, 0
        trial = theta + step
        r_trial = system.residual(trial)
        while config.damping and _norm(r_trial) > norm and halvings < config.max_halvings:
            t *= 0.5
            halvings += 1
            trial = theta + t * step
            r_trial = system.residual(trial)

        previous = norm
        theta, r, norm = trial, r_trial, _norm(r_trial)
        step_norm = t * _norm(step)
        diag.iterations = it
        diag.residual_norms.append(norm)
        diag.step_norms.append(step_norm)
        diag.halvings.append(halvings)
        logger.debug(f"Gauss-Newton {it}: residual {norm:.6e}, step {step_norm:.3e}, halvings {halvings}")

        growth = growth + 1 if norm > previous else 0
        if growth >= config.divergence_patience:
            diag.reason = 'diverged'
            raise ConvergenceError(
                f"Gauss-Newton residual grew on {growth} consecutive iterations (now {norm:.3e})", diag
            )

        if step_norm <= config.tol_step * max(1.0, _norm(theta)):
            diag.converged, diag.reason = True, 'step'
            break
        if norm <= previous and previous - norm <= config.stagnation_rtol * previous:
            diag.converged, diag.reason = True, 'stagnation'
            break
    else:
        diag.reason = 'max_iter'
        logger.warning(f"Gauss-Newton stopped at max_iter={config.max_iter}, residual {norm:.3e}")

    return theta, diag


def solve(system, theta0=None, gn_config: GaussNewtonConfig = GaussNewtonConfig(),
          lsq_config: LeastSquaresConfig = LeastSquaresConfig()) -> SolveResult:
    """Linear least squares for affine systems, Gauss-Newton otherwise"""
    if system.affine:
        sol = solve_linear(system, lsq_config)
        return SolveResult(sol.theta, sol.residual_norm, sol.cond_est, sol.method)

    theta, diag = solve_gauss_newton(system, theta0, gn_config, lsq_config)
    return SolveResult(theta, diag.residual_norms[-1], diag.cond_est, 'gauss-newton', diag)
