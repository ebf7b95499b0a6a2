"""
Error Metrics
Solution errors against an exact solution, algebraic rate fits and relative-constraint residual probes
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from ..basis import gll_rule
from ..config import ErrorMetricConfig
from ..constraints import RelativeEdgeConstraint
from ..fce1d import eval_block_1d, materialize_1d
from ..fce2d import eval_block_2d, materialize_2d

logger = logging.getLogger(__name__)


__all__ = ['linf_error', 'l2_error', 'fit_rate', 'constraint_residual']


def _element_samples(field_, element, points_1d: Callable[[float, float], np.ndarray]):
    """Coordinates of a per-direction point rule on one element, tensorised in 2D"""
    if field_.dim == 1:
        return (points_1d(*field_.partition.interval(element)),)
    i, j = element
    X, Y = np.meshgrid(points_1d(*field_.mesh.x.interval(i)), points_1d(*field_.mesh.y.interval(j)), indexing='ij')
    return X.ravel(), Y.ravel()


def _elements(field_):
    if field_.dim == 1:
        return range(field_.partition.N)
    return [(i, j) for i in range(field_.mesh.Nx) for j in range(field_.mesh.Ny)]


def _element_values(field_, Theta: np.ndarray, element, coords) -> np.ndarray:
    """Element-own values, so discontinuous fields are sampled per piece"""
    if field_.dim == 1:
        return eval_block_1d(field_, element, coords[0], 0).evaluate(Theta)
    return eval_block_2d(field_, element, coords[0], coords[1], (0, 0)).evaluate(Theta)


def linf_error(field_, Theta, exact: Callable, config: ErrorMetricConfig = ErrorMetricConfig()) -> float:
    """
    Max |u - u_ex| over linf_points uniform points per element per direction

    Args:
        field_: Solved field
        Theta: Full layout vector
        exact: u_ex(*coords) (derivative order defaults to zero)
        config: Sample counts
    """
    Theta = field_.layout.check(Theta)
    worst = 0.0
    for element in _elements(field_):
        coords = _element_samples(field_, element, lambda a, b: np.linspace(a, b, config.linf_points))
        diff = _element_values(field_, Theta, element, coords) - exact(*coords)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def l2_error(field_, Theta, exact: Callable, config: ErrorMetricConfig = ErrorMetricConfig()) -> float:
    """Quadrature-weighted discrete L2 error on l2_points GLL nodes per element per direction"""
    Theta = field_.layout.check(Theta)
    rule = gll_rule(config.l2_points)
    total = 0.0
    for element in _elements(field_):
        coords = _element_samples(field_, element, lambda a, b: rule.mapped(a, b)[0])
        weights = _element_samples(field_, element, lambda a, b: rule.mapped(a, b)[1])
        w = np.prod(np.vstack(weights), axis=0)
        diff = _element_values(field_, Theta, element, coords) - exact(*coords)
        total += float(np.sum(w * diff ** 2))
    return float(np.sqrt(total))


def fit_rate(h: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """
    Slope of log(error) against log(h) by least squares

    Points with non-finite or non-positive errors are skipped; fewer than two
    usable points give None.
    """
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0) & (h > 0)
    if np.count_nonzero(keep) < 2 or np.unique(h[keep]).size < 2:
        return None
    slope, _ = np.polyfit(np.log(h[keep]), np.log(errors[keep]), 1)
    return float(slope)


def constraint_residual(field_, Theta, constraint, probes: int = 20) -> float:
    """
    Largest violation of a relative constraint, evaluated directly on the solved field

    1D point constraints give one value; 2D edge constraints are probed at
    uniform points along the lines.
    """
    Theta = field_.layout.check(Theta)
    if isinstance(constraint, RelativeEdgeConstraint):
        y0, y1 = field_.mesh.y.a, field_.mesh.y.b
        y = np.linspace(y0, y1, probes)
        target = materialize_2d(field_, Theta, np.full_like(y, constraint.target_x), y)
        source = materialize_2d(field_, Theta, np.full_like(y, constraint.source_x), y)
        return float(np.max(np.abs(target - source - constraint.jump(y, 0))))

    def value(ref) -> float:
        return float(materialize_1d(field_, Theta, [ref.location], ref.deriv)[0])

    sources = np.array([value(s) for s in constraint.sources])
    if constraint.linear_form:
        f = float(np.dot(constraint.coefficients, sources))
    else:
        f = float(constraint.function(sources))
    return abs(value(constraint.target) - f - constraint.offset)
