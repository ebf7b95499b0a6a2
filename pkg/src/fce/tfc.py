"""
Functional Connections Module
Switching functions, univariate constrained expressions and bivariate boundary lifts
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .exceptions import ConfigurationError, DataError, SupportBasisError

logger = logging.getLogger(__name__)


__all__ = [
    'LinearSwitchPair', 'HermiteSwitchQuad', 'PointConstraint', 'ConstrainedExpression1D',
    'EdgeTraces', 'CornerValues', 'LiftedFunction',
    'linear_switch', 'hermite_switch', 'switch_family', 'monomial_support',
    'build_constrained_expression', 'bivariate_lift_c0', 'bivariate_lift_c1',
]

VALUE = 0
DERIVATIVE = 1

CORNER_TOL = 1e-10
SUPPORT_COND_LIMIT = 1e12

# trace(t, deriv) -> values along an edge
Trace = Callable[[np.ndarray, int], np.ndarray]
Rectangle = Tuple[Tuple[float, float], Tuple[float, float]]


def _check_interval(a: float, b: float):
    if not b > a:
        raise ConfigurationError(f"Switching functions need b > a, got a={a}, b={b}")


@dataclass(frozen=True)
class LinearSwitchPair:
    """φ0 = (b - x)/(b - a), φ1 = (x - a)/(b - a)"""
    a: float
    b: float

    # (end, derivative order) picked out by each member: value at a, value at b
    functionals = ((0, VALUE), (1, VALUE))

    def __post_init__(self):
        _check_interval(self.a, self.b)

    @property
    def size(self) -> int:
        return 2

    @property
    def continuity(self) -> int:
        return 0

    def eval(self, x, deriv: int = 0) -> np.ndarray:
        """Columns φ0, φ1 at points x"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = self.b - self.a
        if deriv == 0:
            return np.column_stack(((self.b - x) / h, (x - self.a) / h))
        if deriv == 1:
            return np.column_stack((np.full_like(x, -1.0 / h), np.full_like(x, 1.0 / h)))
        return np.zeros((x.size, 2))


@dataclass(frozen=True)
class HermiteSwitchQuad:
    """
    Cubic Hermite cardinal functions on [a, b]

    ψ0 = 3φ0² - 2φ0³, ψ1 = 3φ1² - 2φ1³, φ̃0 = -(b - a)(φ0³ - φ0²),
    φ̃1 = (b - a)(φ1³ - φ1²).
    """
    a: float
    b: float

    functionals = ((0, VALUE), (1, VALUE), (0, DERIVATIVE), (1, DERIVATIVE))

    def __post_init__(self):
        _check_interval(self.a, self.b)

    @property
    def size(self) -> int:
        return 4

    @property
    def continuity(self) -> int:
        return 1

    def eval(self, x, deriv: int = 0) -> np.ndarray:
        """Columns ψ0, ψ1, φ̃0, φ̃1 at points x"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = self.b - self.a
        t0 = (self.b - x) / h
        t1 = (x - self.a) / h
        if deriv == 0:
            cols = (3 * t0**2 - 2 * t0**3, 3 * t1**2 - 2 * t1**3,
                    h * (t0**2 - t0**3), h * (t1**3 - t1**2))
        elif deriv == 1:
            # the (b - a) prefactor cancels against dφ/dx on the φ̃ members
            cols = (-(6 * t0 - 6 * t0**2) / h, (6 * t1 - 6 * t1**2) / h,
                    3 * t0**2 - 2 * t0, 3 * t1**2 - 2 * t1)
        elif deriv == 2:
            cols = ((6 - 12 * t0) / h**2, (6 - 12 * t1) / h**2,
                    (2 - 6 * t0) / h, (6 * t1 - 2) / h)
        else:
            return np.zeros((x.size, 4))
        return np.column_stack(cols)


def linear_switch(a: float, b: float) -> LinearSwitchPair:
    return LinearSwitchPair(float(a), float(b))


def hermite_switch(a: float, b: float) -> HermiteSwitchQuad:
    return HermiteSwitchQuad(float(a), float(b))


def switch_family(continuity: int, a: float, b: float):
    """Linear pair for C0 coupling, Hermite quad for C1"""
    if continuity == 0:
        return linear_switch(a, b)
    if continuity == 1:
        return hermite_switch(a, b)
    raise ConfigurationError(f"Continuity order must be 0 or 1, got {continuity}")


# ============================================================================
# UNIVARIATE CONSTRAINED EXPRESSIONS
# ============================================================================

@dataclass(frozen=True)
class PointConstraint:
    """L u(x_i) = κ_i with L the value or first-derivative operator"""
    location: float
    operator: int = VALUE
    target: float = 0.0

    def __post_init__(self):
        if self.operator not in (VALUE, DERIVATIVE):
            raise ConfigurationError(f"Point constraint operator must be 0 or 1, got {self.operator}")


# support(x, deriv) -> values
SupportFunction = Callable[[np.ndarray, int], np.ndarray]


def monomial_support(count: int, center: float = 0.0) -> List[SupportFunction]:
    """Monomials (x - center)^k, k = 0..count-1, with derivatives"""
    def make(k: int) -> SupportFunction:
        def support(x, deriv: int = 0):
            x = np.asarray(x, dtype=float)
            if deriv > k:
                return np.zeros_like(x)
            coef = float(np.prod(np.arange(k - deriv + 1, k + 1))) if deriv else 1.0
            return coef * (x - center) ** (k - deriv)
        return support

    return [make(k) for k in range(count)]


@dataclass(frozen=True)
class ConstrainedExpression1D:
    """u(x) = g(x) + Σ_i [κ_i - L_i g(x_i)] S_i(x) with switching functions S = p P⁻¹"""
    constraints: Tuple[PointConstraint, ...]
    support_basis: Tuple[SupportFunction, ...]
    p_inverse: np.ndarray
    condition: float

    def switching(self, x, deriv: int = 0) -> np.ndarray:
        """Switching functions S_j (columns) at points x"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        support = np.column_stack([p(x, deriv) for p in self.support_basis])
        return support @ self.p_inverse

    def apply(self, g: Callable[[np.ndarray, int], np.ndarray], x, deriv: int = 0) -> np.ndarray:
        """Evaluate the constrained expression built on free function g(x, deriv)"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mismatch = np.array([
            c.target - float(np.asarray(g(np.array([c.location]), c.operator)).ravel()[0])
            for c in self.constraints
        ])
        return np.asarray(g(x, deriv), dtype=float) + self.switching(x, deriv) @ mismatch


def build_constrained_expression(constraints: Sequence[PointConstraint],
                                 support_basis: Optional[Sequence[SupportFunction]] = None
                                 ) -> ConstrainedExpression1D:
    """
    Derive switching functions for a set of point constraints

    Args:
        constraints: Value or first-derivative constraints
        support_basis: Support functions p(x, deriv); centred monomials when omitted

    Returns:
        ConstrainedExpression1D satisfying every constraint for any free function
    """
    constraints = tuple(constraints)
    if not constraints:
        raise ConfigurationError("At least one point constraint is required")

    if support_basis is None:
        locations = [c.location for c in constraints]
        support_basis = monomial_support(len(constraints), 0.5 * (min(locations) + max(locations)))
    support_basis = tuple(support_basis)
    if len(support_basis) != len(constraints):
        raise ConfigurationError(
            f"Support basis size {len(support_basis)} differs from constraint count {len(constraints)}"
        )

    P = np.array([
        [float(np.asarray(p(np.array([c.location]), c.operator)).ravel()[0]) for p in support_basis]
        for c in constraints
    ])
    condition = float(np.linalg.cond(P))
    if not np.isfinite(condition) or condition > SUPPORT_COND_LIMIT:
        raise SupportBasisError(
            f"Constraint matrix is singular (condition {condition:.3e}) for constraints {constraints}",
            constraints,
        )

    lu, piv = linalg.lu_factor(P)
    p_inverse = linalg.lu_solve((lu, piv), np.eye(len(constraints)))
    logger.debug(f"Constrained expression built: {len(constraints)} constraints, cond {condition:.3e}")
    return ConstrainedExpression1D(constraints, support_basis, p_inverse, condition)


# ============================================================================
# BIVARIATE LIFTS
# ============================================================================

BoundaryFunction = Callable[..., np.ndarray]


@dataclass(frozen=True)
class EdgeTraces:
    """
    Functions on the four edges of a rectangle

    left/right are functions of y, bottom/top functions of x; each is called
    as trace(t, deriv) with deriv the tangential derivative order.
    """
    left: Trace
    right: Trace
    bottom: Trace
    top: Trace

    @classmethod
    def from_function(cls, f: BoundaryFunction, rect: Rectangle, kx: int = 0, ky: int = 0) -> 'EdgeTraces':
        """Traces of ∂^(kx,ky) f, where f(x, y, kx, ky) evaluates partial derivatives"""
        (a1, b1), (a2, b2) = rect

        def vertical(x0):
            return lambda t, d=0: np.asarray(f(np.full_like(np.asarray(t, dtype=float), x0), t, kx, ky + d))

        def horizontal(y0):
            return lambda t, d=0: np.asarray(f(t, np.full_like(np.asarray(t, dtype=float), y0), kx + d, ky))

        return cls(vertical(a1), vertical(b1), horizontal(a2), horizontal(b2))

    def vertical(self, end: int) -> Trace:
        return self.right if end else self.left

    def horizontal(self, end: int) -> Trace:
        return self.top if end else self.bottom


@dataclass(frozen=True)
class CornerValues:
    """f, f_x, f_y, f_xy at the corners; values[(ox, oy)][(ex, ey)]"""
    values: Dict[Tuple[int, int], np.ndarray]

    @classmethod
    def from_function(cls, f: BoundaryFunction, rect: Rectangle) -> 'CornerValues':
        (a1, b1), (a2, b2) = rect
        xs = np.array([a1, b1])
        ys = np.array([a2, b2])
        values = {}
        for order in ((0, 0), (1, 0), (0, 1), (1, 1)):
            grid = np.array([[float(np.asarray(f(np.array([x]), np.array([y]), *order)).ravel()[0])
                              for y in ys] for x in xs])
            values[order] = grid
        return cls(values)

    def get(self, order: Tuple[int, int], ex: int, ey: int) -> float:
        return float(self.values[order][ex, ey])


class LiftedFunction:
    """Callable f(x, y, kx=0, ky=0) produced by a bivariate lift"""

    def __init__(self, evaluator: Callable[[np.ndarray, np.ndarray, int, int], np.ndarray], label: str):
        self._evaluator = evaluator
        self.label = label

    def __call__(self, x, y, kx: int = 0, ky: int = 0) -> np.ndarray:
        x, y = np.broadcast_arrays(np.atleast_1d(np.asarray(x, dtype=float)),
                                   np.atleast_1d(np.asarray(y, dtype=float)))
        return self._evaluator(x.ravel(), y.ravel(), kx, ky)

    def __repr__(self):
        return f"LiftedFunction({self.label})"


def _boolean_sum(sx, sy, vertical: Callable, horizontal: Callable, corner: Callable):
    """
    Σ_a Sx_a B_a(y) + Σ_b Sy_b C_b(x) - Σ_ab Sx_a Sy_b D_ab

    vertical(end, order, y, d) and horizontal(end, order, x, d) return edge data,
    corner(ex, ey, ox, oy) the corner scalar.
    """
    def evaluate(x, y, kx, ky):
        Sx = sx.eval(x, kx)
        Sy = sy.eval(y, ky)
        out = np.zeros(x.size)
        for a, (ea, oa) in enumerate(sx.functionals):
            out += Sx[:, a] * vertical(ea, oa, y, ky)
        for b, (eb, ob) in enumerate(sy.functionals):
            out += Sy[:, b] * horizontal(eb, ob, x, kx)
        for a, (ea, oa) in enumerate(sx.functionals):
            for b, (eb, ob) in enumerate(sy.functionals):
                out -= Sx[:, a] * Sy[:, b] * corner(ea, eb, oa, ob)
        return out

    return evaluate


def _check_corner(label: str, expected: float, actual: float):
    mismatch = abs(expected - actual)
    if mismatch > CORNER_TOL:
        raise DataError(f"Inconsistent corner data ({label}): {expected} vs {actual}", mismatch)


def _trace_at(trace: Trace, t: float, deriv: int = 0) -> float:
    return float(np.asarray(trace(np.array([t]), deriv)).ravel()[0])


def bivariate_lift_c0(rect: Rectangle, traces: EdgeTraces) -> LiftedFunction:
    """
    Lift value traces on the four edges to a function on the rectangle

    Args:
        rect: ((a1, b1), (a2, b2))
        traces: Edge values, consistent at the corners

    Returns:
        LiftedFunction agreeing with the traces on every edge
    """
    (a1, b1), (a2, b2) = rect
    xs, ys = (a1, b1), (a2, b2)
    corners = np.zeros((2, 2))
    for ex in (0, 1):
        for ey in (0, 1):
            from_vertical = _trace_at(traces.vertical(ex), ys[ey])
            from_horizontal = _trace_at(traces.horizontal(ey), xs[ex])
            _check_corner(f"corner ({xs[ex]}, {ys[ey]})", from_vertical, from_horizontal)
            corners[ex, ey] = from_vertical

    evaluator = _boolean_sum(
        linear_switch(a1, b1), linear_switch(a2, b2),
        lambda e, o, y, d: traces.vertical(e)(y, d),
        lambda e, o, x, d: traces.horizontal(e)(x, d),
        lambda ex, ey, ox, oy: corners[ex, ey],
    )
    return LiftedFunction(evaluator, 'c0')


def bivariate_lift_c1(rect: Rectangle, values: EdgeTraces, normals: EdgeTraces,
                      corners: CornerValues) -> LiftedFunction:
    """
    Lift edge values and normal derivatives to a function on the rectangle

    Args:
        rect: ((a1, b1), (a2, b2))
        values: Edge values of f
        normals: f_x on left/right, f_y on bottom/top
        corners: f, f_x, f_y, f_xy at the corners

    Returns:
        LiftedFunction matching values on all edges and normal derivatives on each edge
    """
    (a1, b1), (a2, b2) = rect
    xs, ys = (a1, b1), (a2, b2)
    for ex in (0, 1):
        for ey in (0, 1):
            where = f"({xs[ex]}, {ys[ey]})"
            f0 = corners.get((0, 0), ex, ey)
            _check_corner(f"f at {where}", f0, _trace_at(values.vertical(ex), ys[ey]))
            _check_corner(f"f at {where}", f0, _trace_at(values.horizontal(ey), xs[ex]))
            _check_corner(f"f_x at {where}", corners.get((1, 0), ex, ey), _trace_at(normals.vertical(ex), ys[ey]))
            _check_corner(f"f_x at {where}", corners.get((1, 0), ex, ey), _trace_at(values.horizontal(ey), xs[ex], 1))
            _check_corner(f"f_y at {where}", corners.get((0, 1), ex, ey), _trace_at(normals.horizontal(ey), xs[ex]))
            _check_corner(f"f_y at {where}", corners.get((0, 1), ex, ey), _trace_at(values.vertical(ex), ys[ey], 1))
            _check_corner(f"f_xy at {where}", corners.get((1, 1), ex, ey), _trace_at(normals.vertical(ex), ys[ey], 1))

    def edge(traces_by_order):
        return lambda e, o, t, d: traces_by_order[o](e)(t, d)

    evaluator = _boolean_sum(
        hermite_switch(a1, b1), hermite_switch(a2, b2),
        edge({0: values.vertical, 1: normals.vertical}),
        edge({0: values.horizontal, 1: normals.horizontal}),
        lambda ex, ey, ox, oy: corners.get((ox, oy), ex, ey),
    )
    return LiftedFunction(evaluator, 'c1')
