"""
1D Functionally Connected Elements
C0, C1 and no-continuity piecewise fields on an interval partition with affine point evaluation
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, List, Mapping, Optional, Tuple

import numpy as np

from .basis import (
    LEGENDRE_C0, LEGENDRE_C1, LEGENDRE_FULL, SINUSOID, AffineMap, BasisSet,
)
from .exceptions import ConfigurationError, DomainError
from .layout import AffineBlock, AffineFunctional, BlockAccumulator, Key, ThetaLayout
from .tfc import switch_family

logger = logging.getLogger(__name__)


__all__ = [
    'KIND_C0', 'KIND_C1', 'KIND_NC', 'FAMILY_LEGENDRE', 'FAMILY_SINUSOID',
    'Partition1D', 'FceField1D', 'build_field_1d', 'eval_affine_1d', 'eval_block_1d',
    'materialize_1d', 'default_basis_kind', 'interface_key_1d',
]

KIND_C0 = 'C0'
KIND_C1 = 'C1'
KIND_NC = 'NC'

FAMILY_LEGENDRE = 'legendre'
FAMILY_SINUSOID = 'sinusoid'

# intrinsic continuity order of each kind; -1 means none
CONTINUITY_1D = {KIND_C1: 1, KIND_C0: 0, KIND_NC: -1}

_DEFAULT_BASIS = {
    0: LEGENDRE_C0,
    1: LEGENDRE_C1,
    -1: LEGENDRE_FULL,
}

LOCATE_TOL = 1e-12


def default_basis_kind(continuity: int, family: str = FAMILY_LEGENDRE) -> str:
    """Basis kind carrying the free functions for a continuity order (-1, 0 or 1)"""
    if family == FAMILY_SINUSOID:
        return SINUSOID
    if family != FAMILY_LEGENDRE:
        raise ConfigurationError(f"Unknown basis family: {family}")
    return _DEFAULT_BASIS[continuity]


def check_admissible(continuity: int, basis_kind: str):
    if basis_kind not in (SINUSOID, _DEFAULT_BASIS[continuity]):
        raise ConfigurationError(
            f"Basis {basis_kind} is not admissible with continuity order {continuity}"
        )


@dataclass(frozen=True)
class Partition1D:
    """Breakpoints X_0 < X_1 < ... < X_N"""
    breakpoints: Tuple[float, ...]

    def __post_init__(self):
        X = np.asarray(self.breakpoints, dtype=float)
        if X.ndim != 1 or X.size < 2:
            raise ConfigurationError("A partition needs at least two breakpoints")
        if np.any(np.diff(X) <= 0):
            raise ConfigurationError(f"Breakpoints must be strictly increasing: {self.breakpoints}")
        object.__setattr__(self, 'breakpoints', tuple(float(v) for v in X))

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> 'Partition1D':
        if n < 1:
            raise ConfigurationError(f"Element count must be positive, got {n}")
        return cls(tuple(np.linspace(a, b, n + 1)))

    @property
    def N(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def a(self) -> float:
        return self.breakpoints[0]

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    @property
    def h(self) -> float:
        """Largest element width"""
        return float(np.max(np.diff(self.breakpoints)))

    def interval(self, i: int) -> Tuple[float, float]:
        return self.breakpoints[i], self.breakpoints[i + 1]

    def locate(self, x) -> np.ndarray:
        """Element index of each point; breakpoints resolve to the left element"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        tol = LOCATE_TOL * (self.b - self.a)
        if x.size and (x.min() < self.a - tol or x.max() > self.b + tol):
            bad = x[(x < self.a - tol) | (x > self.b + tol)][0]
            raise DomainError(f"Point {bad} outside partition [{self.a}, {self.b}]")
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side='left') - 1
        return np.clip(idx, 0, self.N - 1)

    def breakpoint_index(self, x: float) -> Optional[int]:
        """Index of the breakpoint at x, None when x is not a breakpoint"""
        X = np.asarray(self.breakpoints)
        k = int(np.argmin(np.abs(X - x)))
        return k if abs(X[k] - x) <= LOCATE_TOL * (self.b - self.a) else None


@dataclass(frozen=True)
class _Element1D:
    basis: BasisSet
    switches: Any
    # rows: switch functionals applied to the basis members
    trace_matrix: Optional[np.ndarray]


@dataclass(frozen=True, eq=False)
class FceField1D:
    """
    Piecewise field u_i on a partition

    C0: u_i = Σ_j ĝ_ij [Φ_ij - Φ_ij(X_i)φ0 - Φ_ij(X_i+1)φ1] + α_i φ0 + α_i+1 φ1.
    C1 adds the derivative functionals with ψ0, ψ1, φ̃0, φ̃1 and β_i.
    NC: u_i = Σ_j ĝ_ij Φ_ij with no coupling.
    """
    partition: Partition1D
    kind: str
    order: int
    basis_kind: str
    fixed: Mapping[Key, float] = field(default_factory=dict)
    eliminations: Tuple[Any, ...] = ()
    ls_conditions: Tuple[Any, ...] = ()
    ls_relative: Tuple[Any, ...] = ()
    layout: ThetaLayout = field(init=False, repr=False)
    _elements: Tuple[_Element1D, ...] = field(init=False, repr=False)

    dim = 1

    def __post_init__(self):
        if self.kind not in CONTINUITY_1D:
            raise ConfigurationError(f"Unknown 1D field kind: {self.kind}")
        check_admissible(self.continuity_order, self.basis_kind)

        elements = []
        for i in range(self.partition.N):
            a, b = self.partition.interval(i)
            basis = BasisSet(self.basis_kind, self.order, AffineMap(a, b))
            if self.kind == KIND_NC:
                elements.append(_Element1D(basis, None, None))
                continue
            switches = switch_family(self.continuity_order, a, b)
            ends = (a, b)
            trace = np.vstack([basis.eval([ends[e]], d) for e, d in switches.functionals])
            elements.append(_Element1D(basis, switches, trace))
        object.__setattr__(self, '_elements', tuple(elements))
        object.__setattr__(self, 'layout', ThetaLayout(self._keys(), self.fixed))
        logger.debug(f"1D {self.kind} field: N={self.partition.N}, p={self.order}, free={self.layout.size}")

    def _keys(self) -> List[Key]:
        N = self.partition.N
        keys: List[Key] = [('g', i, k) for i in range(N) for k in range(self._elements[i].basis.count)]
        if self.kind != KIND_NC:
            keys += [('alpha', i) for i in range(N + 1)]
        if self.kind == KIND_C1:
            keys += [('beta', i) for i in range(N + 1)]
        return keys

    @property
    def continuity_order(self) -> int:
        return CONTINUITY_1D[self.kind]

    @property
    def continuity(self) -> Tuple[int]:
        return (self.continuity_order,)

    @property
    def free_count(self) -> int:
        return self.layout.size

    @property
    def h(self) -> float:
        return self.partition.h

    @property
    def n_elements(self) -> int:
        return self.partition.N

    def element(self, i: int) -> _Element1D:
        return self._elements[i]

    def locate(self, x) -> np.ndarray:
        return self.partition.locate(x)

    def with_updates(self, **changes) -> 'FceField1D':
        """Copy with boundary data or registered conditions replaced"""
        return replace(self, **changes)


def interface_key_1d(index: int, deriv: int) -> Key:
    """Parameter holding u (deriv 0) or u' (deriv 1) at breakpoint index"""
    return ('alpha', index) if deriv == 0 else ('beta', index)


def build_field_1d(partition: Partition1D, kind: str, order: int,
                   fixed_data: Optional[Mapping[Key, float]] = None,
                   family: str = FAMILY_LEGENDRE, basis_kind: Optional[str] = None,
                   boundary=None) -> FceField1D:
    """
    Build a 1D field

    Args:
        partition: Interval breakpoints
        kind: 'C1', 'C0' or 'NC'
        order: Basis order p (highest Legendre degree or sinusoid count)
        fixed_data: Parameter values to pin, e.g. {('alpha', 0): 1.0}
        family: 'legendre' or 'sinusoid' when basis_kind is not given
        basis_kind: Explicit basis kind, checked for admissibility
        boundary: Optional BoundarySpec applied after construction

    Returns:
        FceField1D
    """
    if kind not in CONTINUITY_1D:
        raise ConfigurationError(f"Unknown 1D field kind: {kind}")
    if basis_kind is None:
        basis_kind = default_basis_kind(CONTINUITY_1D[kind], family)

    field_ = FceField1D(partition, kind, int(order), basis_kind, dict(fixed_data or {}))
    if boundary is not None:
        from .constraints import apply_boundary
        field_ = apply_boundary(field_, boundary)
    return field_


def eval_block_1d(field_: FceField1D, element: int, x, deriv: int = 0) -> AffineBlock:
    """Affine functionals of u^(deriv) at points x, all evaluated with element's local form"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    acc = BlockAccumulator(x.size)
    _add_element(field_, acc, element, x, deriv)
    return acc.to_block(field_.layout)


def _add_element(field_: FceField1D, acc: BlockAccumulator, i: int, x: np.ndarray, deriv: int,
                 weight: Optional[np.ndarray] = None):
    el = field_.element(i)
    w = np.ones(x.size) if weight is None else weight
    values = el.basis.eval(x, deriv)
    g_keys = [('g', i, k) for k in range(el.basis.count)]
    if el.switches is None:
        acc.add(g_keys, w[:, None] * values)
        return

    S = el.switches.eval(x, deriv)
    acc.add(g_keys, w[:, None] * (values - S @ el.trace_matrix))
    corner_keys = [interface_key_1d(i + e, d) for e, d in el.switches.functionals]
    acc.add(corner_keys, w[:, None] * S)


def eval_affine_1d(field_: FceField1D, x: float, deriv: int = 0,
                   element: Optional[int] = None) -> AffineFunctional:
    """
    Affine functional of u^(deriv)(x)

    Args:
        field_: 1D field
        x: Point in the partition
        deriv: Derivative order 0..2
        element: Element whose local form is used; located (left tie-break) when None

    Returns:
        AffineFunctional over the free parameters
    """
    if element is None:
        element = int(field_.locate(x)[0])
    else:
        a, b = field_.partition.interval(element)
        AffineMap(a, b).check(x)
    return eval_block_1d(field_, element, [x], deriv).functional(0)


def materialize_1d(field_: FceField1D, theta, xs, deriv: int = 0) -> np.ndarray:
    """Values of u^(deriv) at xs for parameter vector theta"""
    theta = field_.layout.check(theta)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    owner = field_.locate(xs)
    out = np.empty(xs.size)
    for i in np.unique(owner):
        mask = owner == i
        out[mask] = eval_block_1d(field_, int(i), xs[mask], deriv).evaluate(theta)
    return out
