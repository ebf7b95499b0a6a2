"""
Benchmark Problem Catalog
Manufactured-solution cases: operator, exact solution, boundary data, relative constraints and default settings
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import sympy as sp

from ..constraints import (
    DIRICHLET, EXACT, NEUMANN, BoundaryCondition, BoundarySpec, PointRef, RelativeConstraint,
    RelativeEdgeConstraint,
)
from ..exceptions import ConfigurationError
from ..fce1d import FAMILY_LEGENDRE, FAMILY_SINUSOID
from ..solver.collocation import GLL, UNIFORM
from ..solver.problem import ProblemSpec

logger = logging.getLogger(__name__)


__all__ = [
    'ExactSolution', 'SideCondition', 'ProblemCase', 'check_manufactured',
    'register', 'get_case', 'list_cases', 'CASES',
]

GATE_SAMPLES = 100
GATE_TOL = 1e-10
GATE_SEED = 20240101


# ============================================================================
# EXACT SOLUTIONS
# ============================================================================

class ExactSolution:
    """
    Closed-form solution with lambdified partial derivatives

    Called as u(x, k) in 1D and u(x, y, kx, ky) in 2D, the same signature
    that 2D boundary data and edge traces use.
    """

    def __init__(self, expression: str, variables: Tuple[str, ...] = ('x',)):
        self.variables = tuple(variables)
        self.symbols = tuple(sp.Symbol(v) for v in self.variables)
        self.expression = sp.sympify(expression, locals=dict(zip(self.variables, self.symbols)))
        self._compiled: Dict[Tuple[int, ...], Callable] = {}

    @property
    def dim(self) -> int:
        return len(self.symbols)

    def derivative_expr(self, orders: Tuple[int, ...]) -> sp.Expr:
        expr = self.expression
        for s, k in zip(self.symbols, orders):
            if k:
                expr = sp.diff(expr, s, k)
        return expr

    def derivative(self, *orders: int) -> Callable[..., np.ndarray]:
        orders = tuple(int(k) for k in orders) + (0,) * (self.dim - len(orders))
        if orders not in self._compiled:
            self._compiled[orders] = sp.lambdify(self.symbols, self.derivative_expr(orders), 'numpy')
        f = self._compiled[orders]

        def evaluate(*coords):
            arrays = [np.asarray(c, dtype=float) for c in coords]
            return np.broadcast_to(np.asarray(f(*arrays), dtype=float), np.broadcast(*arrays).shape).copy()
        return evaluate

    def __call__(self, *args) -> np.ndarray:
        coords, orders = args[:self.dim], args[self.dim:]
        return self.derivative(*orders)(*coords)

    def __repr__(self):
        return f"ExactSolution({self.expression})"


def _compile(expression, symbols: Tuple[sp.Symbol, ...]):
    """Constant or callable of the coordinates for a coefficient or source expression"""
    expr = sp.sympify(expression, locals={s.name: s for s in symbols})
    if not expr.free_symbols:
        return float(expr)
    f = sp.lambdify(symbols, expr, 'numpy')
    return lambda *coords: np.asarray(f(*coords), dtype=float)


# ============================================================================
# CASE DEFINITION
# ============================================================================

@dataclass(frozen=True)
class SideCondition:
    """a·u + b·∂u/∂n on one side, data taken from the exact solution"""
    side: str
    kind: str = DIRICHLET
    a: float = 1.0
    b: float = 0.0


@dataclass(frozen=True)
class ProblemCase:
    """
    Registered benchmark problem

    terms maps derivative multi-indices to coefficient expressions in the
    case variables; source is the declared right-hand side, checked
    against the operator applied to the exact solution at registration.
    """
    case_id: str
    description: str
    exact: ExactSolution
    terms: Mapping[Tuple[int, ...], Any]
    source: str
    nonlinear: Optional[str] = None
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)
    boundary: Tuple[SideCondition, ...] = ()
    relative: Tuple[Any, ...] = ()
    elements: Tuple[int, ...] = (4,)
    fce: str = 'C1'
    order: int = 6
    colloc: str = GLL
    points: Optional[int] = None
    points_offset: int = 2
    family: str = FAMILY_LEGENDRE
    scaling: Optional[str] = None
    metric: str = 'linf'
    problem: ProblemSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.domain) != self.exact.dim or len(self.elements) != self.exact.dim:
            raise ConfigurationError(f"Case '{self.case_id}' mixes dimensions")
        object.__setattr__(self, 'problem', self._build_problem())

    @property
    def dim(self) -> int:
        return self.exact.dim

    def _build_problem(self) -> ProblemSpec:
        symbols = self.exact.symbols
        terms = {tuple(d): _compile(c, symbols) for d, c in self.terms.items()}
        kwargs: Dict[str, Any] = {'name': self.case_id}
        if self.nonlinear is not None:
            u = sp.Symbol('u')
            expr = sp.sympify(self.nonlinear, locals={'u': u})
            kwargs['nonlinear'] = sp.lambdify(u, expr, 'numpy')
            kwargs['nonlinear_derivative'] = _broadcasting(sp.lambdify(u, sp.diff(expr, u), 'numpy'))
        return ProblemSpec(self.dim, terms, _compile(self.source, symbols), **kwargs)

    def default_points(self, order: int) -> int:
        return self.points if self.points is not None else order + self.points_offset

    def residual_at(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        """L u_ex + N(u_ex) - S at the given points"""
        total = -self.problem.source_values(coords)
        for d, c in self.problem.coefficients(coords).items():
            total += c * self.exact.derivative(*d)(*coords)
        if not self.problem.linear:
            total += self.problem.nonlinear(self.exact.derivative()(*coords))
        return total

    def boundary_spec(self) -> BoundarySpec:
        """Boundary conditions in exact mode with data from the exact solution"""
        return BoundarySpec(tuple(self._condition(s) for s in self.boundary))

    def _condition(self, s: SideCondition) -> BoundaryCondition:
        if self.dim == 1:
            x0 = np.array([self.domain[0][0] if s.side == 'left' else self.domain[0][1]])
            data = float(s.a * self.exact(x0, 0)[0] + s.b * self.exact(x0, 1)[0])
        else:
            data = _side_data(self.exact, s)
        if s.kind == DIRICHLET:
            return BoundaryCondition.dirichlet(s.side, data)
        if s.kind == NEUMANN:
            return BoundaryCondition.neumann(s.side, data)
        return BoundaryCondition.robin(s.side, s.a, s.b, data)


def _broadcasting(f: Callable) -> Callable:
    return lambda u: np.broadcast_to(np.asarray(f(u), dtype=float), np.shape(u)).copy()


def _side_data(exact: ExactSolution, s: SideCondition) -> Callable:
    normal = (1, 0) if s.side in ('left', 'right') else (0, 1)

    def data(x, y, kx=0, ky=0):
        out = s.a * exact(x, y, kx, ky) if s.a else 0.0
        if s.b:
            out = out + s.b * exact(x, y, kx + normal[0], ky + normal[1])
        return np.asarray(out, dtype=float)
    return data


def _edge_jump(exact: ExactSolution, target_x: float, source_x: float) -> Callable:
    """y -> d^k/dy^k [u(target_x, y) - u(source_x, y)]"""
    def jump(y, k=0):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return exact(np.full_like(y, target_x), y, 0, k) - exact(np.full_like(y, source_x), y, 0, k)
    return jump


def check_manufactured(case: ProblemCase, samples: int = GATE_SAMPLES, tol: float = GATE_TOL,
                       seed: int = GATE_SEED) -> float:
    """
    Check the declared source against the operator applied to the exact solution

    Returns:
        Largest relative residual over the random sample points

    Raises:
        ConfigurationError: residual above tol
    """
    rng = np.random.default_rng(seed)
    coords = tuple(rng.uniform(a, b, samples) for a, b in case.domain)
    residual = np.abs(case.residual_at(coords))
    scale = max(1.0, float(np.max(np.abs(case.problem.source_values(coords)))))
    worst = float(np.max(residual)) / scale
    if not worst <= tol:
        raise ConfigurationError(
            f"Case '{case.case_id}': declared source misses the manufactured one by {worst:.3e}"
        )
    return worst


# ============================================================================
# REGISTRY
# ============================================================================

CASES: Dict[str, ProblemCase] = {}


def register(case: ProblemCase) -> ProblemCase:
    if case.case_id in CASES:
        raise ConfigurationError(f"Case '{case.case_id}' is already registered")
    check_manufactured(case)
    CASES[case.case_id] = case
    return case


def get_case(case_id: str) -> ProblemCase:
    try:
        return CASES[case_id]
    except KeyError:
        raise ConfigurationError(f"Unknown case '{case_id}'; available: {', '.join(sorted(CASES))}") from None


def list_cases() -> List[ProblemCase]:
    return [CASES[k] for k in sorted(CASES)]


def _cube(v):
    return v[0] ** 3


def _cube_gradient(v):
    return np.array([3.0 * v[0] ** 2])


def _register_catalog():
    unit = ((0.0, 1.0),)
    square = ((0.0, 1.0), (0.0, 1.0))
    helmholtz = {(2,): 1, (0,): -1}
    cosine = ExactSolution('cos(pi*x)')

    register(ProblemCase(
        'helmholtz1d', "u'' - u = -(1+pi^2) cos(pi x), u(0) = 1, u'(1) = 0",
        cosine, helmholtz, '-(1 + pi**2)*cos(pi*x)', domain=unit,
        boundary=(SideCondition('left'), SideCondition('right', NEUMANN, 0.0, 1.0)),
        elements=(4,), fce='C1', order=6, metric='l2',
    ))
    register(ProblemCase(
        'vc-helmholtz1d', "u'' - (1+x^2) u = -(1+pi^2+x^2) cos(pi x), u(0) = 1, u'(1) = 0",
        cosine, {(2,): 1, (0,): '-(1 + x**2)'}, '-(1 + pi**2 + x**2)*cos(pi*x)', domain=unit,
        boundary=(SideCondition('left'), SideCondition('right', NEUMANN, 0.0, 1.0)),
        elements=(4,), fce='C1', order=6, metric='l2',
    ))
    register(ProblemCase(
        'ivp1d', "u' + u = exp(sin(pi t)) (1 + pi cos(pi t)), u(0) = 1",
        ExactSolution('exp(sin(pi*x))'), {(1,): 1, (0,): 1}, 'exp(sin(pi*x))*(1 + pi*cos(pi*x))',
        domain=unit, boundary=(SideCondition('left'),), elements=(4,), fce='C0', order=5,
    ))
    register(ProblemCase(
        'nl-helmholtz1d', "u'' - u + sin(u) = f, u(0) = u(1) = 1",
        ExactSolution('1 + sin(pi*x)/2'), helmholtz,
        '-pi**2*sin(pi*x)/2 - (1 + sin(pi*x)/2) + sin(1 + sin(pi*x)/2)', nonlinear='sin(u)',
        domain=unit, boundary=(SideCondition('left'), SideCondition('right')),
        elements=(4,), fce='C1', order=8, colloc=UNIFORM,
    ))
    register(ProblemCase(
        'sin-poisson1d', "u'' = f, Dirichlet, sinusoid bases",
        ExactSolution('tanh(x)'), {(2,): 1}, '-2*tanh(x)/cosh(x)**2', domain=unit,
        boundary=(SideCondition('left'), SideCondition('right')),
        elements=(5,), fce='C1', order=11, points_offset=3, family=FAMILY_SINUSOID,
    ))
    register(ProblemCase(
        'sin-ivp1d', "u' + u = f, u(0) = u0, sinusoid bases",
        ExactSolution('tanh(x**2)'), {(1,): 1, (0,): 1}, '2*x/cosh(x**2)**2 + tanh(x**2)', domain=unit,
        boundary=(SideCondition('left'),), elements=(5,), fce='C0', order=11, points_offset=3,
        family=FAMILY_SINUSOID,
    ))
    register(ProblemCase(
        'relbc1d-linear', "u'' - u = -(1+pi^2) cos(pi x), u(0) = u(0.5) + 1, u'(1) = u'(0.5) + pi",
        cosine, helmholtz, '-(1 + pi**2)*cos(pi*x)', domain=unit,
        relative=(
            RelativeConstraint.linear(PointRef(0.0), [PointRef(0.5)], [1.0], 1.0),
            RelativeConstraint.linear(PointRef(1.0, 1), [PointRef(0.5, 1)], [1.0], float(np.pi)),
        ),
        elements=(2,), fce='C1', order=10,
    ))
    register(ProblemCase(
        'relbc1d-nonlinear', "u'' - u = -(1+pi^2) sin(pi x)/2 - 1, u(0)^3 = u(1), u'(0) = 2u'(0.5) + pi/2",
        ExactSolution('1 + sin(pi*x)/2'), helmholtz, '-(1 + pi**2)*sin(pi*x)/2 - 1', domain=unit,
        relative=(
            RelativeConstraint.nonlinear(PointRef(1.0), [PointRef(0.0)], _cube, _cube_gradient),
            RelativeConstraint.linear(PointRef(0.0, 1), [PointRef(0.5, 1)], [2.0], float(np.pi / 2)),
        ),
        elements=(2,), fce='C1', order=10, colloc=UNIFORM, points=20,
    ))

    sin_cos = ExactSolution('sin(pi*x)*cos(pi*y)', ('x', 'y'))
    register(ProblemCase(
        'helmholtz2d', "u_xx + u_yy - u = f, Dirichlet on all sides",
        sin_cos, {(2, 0): 1, (0, 2): 1, (0, 0): -1}, '-(1 + 2*pi**2)*sin(pi*x)*cos(pi*y)', domain=square,
        boundary=tuple(SideCondition(s) for s in ('left', 'right', 'bottom', 'top')),
        elements=(2, 1), fce='C1', order=9,
    ))
    register(ProblemCase(
        'advection2d', "u_t + 2u_x = f, u(0,t) and u(x,0) given",
        ExactSolution('exp(cos(pi*x))*sin(pi*t)', ('x', 't')), {(0, 1): 1, (1, 0): 2},
        'pi*exp(cos(pi*x))*(cos(pi*t) - 2*sin(pi*x)*sin(pi*t))', domain=square,
        boundary=(SideCondition('left'), SideCondition('bottom')),
        elements=(4, 4), fce='C0', order=6,
    ))
    register(ProblemCase(
        'heat2d', "u_t - u_xx = f, Dirichlet at x=0, x=1 and t=0",
        ExactSolution('exp(-t)*cos(pi*x)', ('x', 't')), {(0, 1): 1, (2, 0): -1},
        '(pi**2 - 1)*exp(-t)*cos(pi*x)', domain=square,
        boundary=(SideCondition('left'), SideCondition('right'), SideCondition('bottom')),
        elements=(2, 2), fce='MixedC1x', order=8,
    ))
    register(ProblemCase(
        'relbc2d', "u_xx + u_yy = f, u(1,y) = u(0.5,y) + g(y), Dirichlet at x=0, y=0, y=1",
        sin_cos, {(2, 0): 1, (0, 2): 1}, '-2*pi**2*sin(pi*x)*cos(pi*y)', domain=square,
        boundary=(SideCondition('left'), SideCondition('bottom'), SideCondition('top')),
        relative=(RelativeEdgeConstraint(1.0, 0.5, _edge_jump(sin_cos, 1.0, 0.5), EXACT),),
        elements=(2, 1), fce='C0', order=7,
    ))
    logger.info(f"Registered {len(CASES)} benchmark cases")


_register_catalog()
