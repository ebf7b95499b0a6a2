"""
2D Functionally Connected Elements
Tensor-mesh fields with C0, C1, mixed or no intrinsic continuity, built from edge functions and corner parameters
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .basis import AffineMap, BasisSet, TensorBasisSet
from .exceptions import ConfigurationError
from .fce1d import FAMILY_LEGENDRE, Partition1D, check_admissible, default_basis_kind
from .layout import AffineBlock, AffineFunctional, BlockAccumulator, Key, ThetaLayout
from .tfc import switch_family

logger = logging.getLogger(__name__)


__all__ = [
    'KIND_C1', 'KIND_C0', 'KIND_MIXED_X', 'KIND_MIXED_Y', 'KIND_NC', 'CONTINUITY_2D',
    'VERTICAL', 'HORIZONTAL', 'Mesh2D', 'EdgeSlot', 'FixedTrace', 'LinkedTrace', 'FceField2D',
    'build_field_2d', 'edge_eval', 'eval_affine_2d', 'eval_block_2d', 'eval_points_2d', 'materialize_2d',
    'corner_key',
]

KIND_C1 = 'C1'
KIND_C0 = 'C0'
KIND_MIXED_X = 'MixedC1x'
KIND_MIXED_Y = 'MixedC1y'
KIND_NC = 'NC'

# (x continuity, y continuity); -1 means none
CONTINUITY_2D = {
    KIND_C1: (1, 1),
    KIND_C0: (0, 0),
    KIND_MIXED_X: (1, 0),
    KIND_MIXED_Y: (0, 1),
    KIND_NC: (-1, -1),
}

VERTICAL = 'vertical'
HORIZONTAL = 'horizontal'

_CORNER_NAMES = {(0, 0): 'alpha', (1, 0): 'beta_x', (0, 1): 'beta_y', (1, 1): 'gamma'}


def corner_key(i: int, j: int, ox: int, oy: int) -> Key:
    """Corner parameter for ∂^(ox, oy) u at (X_i, Y_j)"""
    return (_CORNER_NAMES[(ox, oy)], i, j)


@dataclass(frozen=True)
class Mesh2D:
    """Tensor mesh; element (i, j) has index i * Ny + j"""
    x: Partition1D
    y: Partition1D

    @classmethod
    def uniform(cls, rect, nx: int, ny: int) -> 'Mesh2D':
        (a1, b1), (a2, b2) = rect
        return cls(Partition1D.uniform(a1, b1, nx), Partition1D.uniform(a2, b2, ny))

    @property
    def Nx(self) -> int:
        return self.x.N

    @property
    def Ny(self) -> int:
        return self.y.N

    @property
    def h(self) -> float:
        return max(self.x.h, self.y.h)

    @property
    def X(self) -> Tuple[float, ...]:
        return self.x.breakpoints

    @property
    def Y(self) -> Tuple[float, ...]:
        return self.y.breakpoints

    def element_index(self, i: int, j: int) -> int:
        return i * self.Ny + j

    def element_ij(self, e: int) -> Tuple[int, int]:
        return divmod(e, self.Ny)

    def locate(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """Element (i, j) of each point; shared edges resolve to the lower index"""
        return self.x.locate(x), self.y.locate(y)


@dataclass(frozen=True)
class EdgeSlot:
    """
    Edge function slot

    A vertical slot sits on x = X_line over [Y_segment, Y_segment+1] and is
    parametrised by y; a horizontal slot sits on y = Y_line and is
    parametrised by x. Role 0 carries u, role 1 the normal derivative.
    """
    orientation: str
    line: int
    segment: int
    role: int = 0


@dataclass(frozen=True)
class FixedTrace:
    """Edge function given by trace(t, d), d the tangential derivative order"""
    trace: Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class LinkedTrace:
    """Edge function equal to scale * (source slot) + offset(t, d)"""
    source: EdgeSlot
    scale: float = 1.0
    offset: Optional[Callable[[np.ndarray, int], np.ndarray]] = None


EdgeSource = Union[FixedTrace, LinkedTrace]


@dataclass(frozen=True, eq=False)
class FceField2D:
    """
    Piecewise field on a tensor mesh

    Each element evaluates the Boolean sum
        u = g̃ + Σ_a Sx_a(x) B_a(y) + Σ_b Sy_b(y) C_b(x) - Σ_ab Sx_a(x) Sy_b(y) D_ab
    where g̃ is the projected interior free function, B_a and C_b are the
    vertical and horizontal edge functions picked out by the switch
    functionals, and D_ab the shared corner parameters.
    """
    mesh: Mesh2D
    kind: str
    order: int
    edge_order: int
    family: str = FAMILY_LEGENDRE
    fixed: Mapping[Key, float] = field(default_factory=dict)
    edge_sources: Mapping[EdgeSlot, EdgeSource] = field(default_factory=dict)
    eliminations: Tuple[Any, ...] = ()
    ls_conditions: Tuple[Any, ...] = ()
    ls_relative: Tuple[Any, ...] = ()
    layout: ThetaLayout = field(init=False, repr=False)
    _cache: Dict[Any, Any] = field(init=False, repr=False)

    dim = 2

    def __post_init__(self):
        if self.kind not in CONTINUITY_2D:
            raise ConfigurationError(f"Unknown 2D field kind: {self.kind}")
        ox, oy = self.continuity
        for c in (ox, oy):
            check_admissible(c, default_basis_kind(c, self.family))
        unknown = [s for s in self.edge_sources if not self._slot_exists(s)]
        if unknown:
            raise ConfigurationError(f"Edge slots not present in a {self.kind} field: {unknown[:3]}")

        object.__setattr__(self, '_cache', {})
        object.__setattr__(self, 'layout', ThetaLayout(self._keys(), self.fixed))
        logger.debug(
            f"2D {self.kind} field: mesh=({self.mesh.Nx},{self.mesh.Ny}), p={self.order}, "
            f"m={self.edge_order}, free={self.layout.size}"
        )

    # ------------------------------------------------------------------
    # structure

    @property
    def continuity(self) -> Tuple[int, int]:
        return CONTINUITY_2D[self.kind]

    @property
    def free_count(self) -> int:
        return self.layout.size

    @property
    def h(self) -> float:
        return self.mesh.h

    @property
    def n_elements(self) -> int:
        return self.mesh.Nx * self.mesh.Ny

    def _slot_exists(self, slot: EdgeSlot) -> bool:
        if self.kind == KIND_NC:
            return False
        ox, oy = self.continuity
        if slot.orientation == VERTICAL:
            return 0 <= slot.line <= self.mesh.Nx and 0 <= slot.segment < self.mesh.Ny and slot.role <= ox
        if slot.orientation == HORIZONTAL:
            return 0 <= slot.line <= self.mesh.Ny and 0 <= slot.segment < self.mesh.Nx and slot.role <= oy
        return False

    def slots(self, orientation: str, role: int) -> List[EdgeSlot]:
        if orientation == VERTICAL:
            return [EdgeSlot(VERTICAL, I, j, role) for I in range(self.mesh.Nx + 1) for j in range(self.mesh.Ny)]
        return [EdgeSlot(HORIZONTAL, J, i, role) for i in range(self.mesh.Nx) for J in range(self.mesh.Ny + 1)]

    def corners(self) -> List[Key]:
        ox, oy = self.continuity
        keys = []
        for order in ((0, 0), (1, 0), (0, 1), (1, 1)):
            if order[0] <= ox and order[1] <= oy:
                keys += [corner_key(I, J, *order) for I in range(self.mesh.Nx + 1) for J in range(self.mesh.Ny + 1)]
        return keys

    def _keys(self) -> List[Key]:
        keys: List[Key] = []
        for e in range(self.n_elements):
            keys += [('g', e, k) for k in range(self.interior_basis(*self.mesh.element_ij(e)).count)]
        if self.kind == KIND_NC:
            return keys

        ox, oy = self.continuity
        for orientation, top_role in ((VERTICAL, ox), (HORIZONTAL, oy)):
            for role in range(top_role + 1):
                for slot in self.slots(orientation, role):
                    if slot in self.edge_sources:
                        continue
                    keys += [self.edge_coefficient_key(slot, k) for k in range(self.edge_basis(slot).count)]
        return keys + self.corners()

    @staticmethod
    def edge_coefficient_key(slot: EdgeSlot, k: int) -> Key:
        name = 'G' if slot.orientation == VERTICAL else 'H'
        return (name, slot.role, slot.line, slot.segment, k)

    # ------------------------------------------------------------------
    # cached per-element data

    def _interval_basis(self, continuity: int, order: int, a: float, b: float) -> BasisSet:
        key = ('basis', continuity, order, a, b)
        if key not in self._cache:
            self._cache[key] = BasisSet(default_basis_kind(continuity, self.family), order, AffineMap(a, b))
        return self._cache[key]

    def _switches(self, continuity: int, a: float, b: float):
        key = ('switch', continuity, a, b)
        if key not in self._cache:
            self._cache[key] = switch_family(continuity, a, b)
        return self._cache[key]

    def _trace_matrix(self, basis: BasisSet, switches) -> np.ndarray:
        key = ('trace', id(basis), id(switches))
        if key not in self._cache:
            ends = (switches.a, switches.b)
            self._cache[key] = np.vstack([basis.eval([ends[e]], d) for e, d in switches.functionals])
        return self._cache[key]

    def interior_basis(self, i: int, j: int) -> TensorBasisSet:
        ox, oy = self.continuity
        (a1, b1), (a2, b2) = self.mesh.x.interval(i), self.mesh.y.interval(j)
        return TensorBasisSet(self._interval_basis(ox, self.order, a1, b1),
                              self._interval_basis(oy, self.order, a2, b2), kind=self.kind)

    def edge_basis(self, slot: EdgeSlot) -> BasisSet:
        a, b = self.edge_interval(slot)
        tangential = self.continuity[1] if slot.orientation == VERTICAL else self.continuity[0]
        return self._interval_basis(tangential, self.edge_order, a, b)

    def edge_switches(self, slot: EdgeSlot):
        a, b = self.edge_interval(slot)
        tangential = self.continuity[1] if slot.orientation == VERTICAL else self.continuity[0]
        return self._switches(tangential, a, b)

    def edge_interval(self, slot: EdgeSlot) -> Tuple[float, float]:
        if slot.orientation == VERTICAL:
            return self.mesh.y.interval(slot.segment)
        return self.mesh.x.interval(slot.segment)

    def edge_position(self, slot: EdgeSlot) -> float:
        return self.mesh.X[slot.line] if slot.orientation == VERTICAL else self.mesh.Y[slot.line]

    def with_updates(self, **changes) -> 'FceField2D':
        """Copy with boundary data, edge sources or registered conditions replaced"""
        return replace(self, **changes)

    # ------------------------------------------------------------------
    # evaluation

    def add_edge(self, acc: BlockAccumulator, slot: EdgeSlot, t: np.ndarray, d: int, weight: np.ndarray):
        """Add weight * (d-th tangential derivative of the slot's edge function) at t"""
        source = self.edge_sources.get(slot)
        if isinstance(source, FixedTrace):
            acc.add_offset(weight * np.asarray(source.trace(t, d), dtype=float))
            return
        if isinstance(source, LinkedTrace):
            self.add_edge(acc, source.source, t, d, weight * source.scale)
            if source.offset is not None:
                acc.add_offset(weight * np.asarray(source.offset(t, d), dtype=float))
            return

        basis = self.edge_basis(slot)
        switches = self.edge_switches(slot)
        S = switches.eval(t, d)
        projected = basis.eval(t, d) - S @ self._trace_matrix(basis, switches)
        acc.add([self.edge_coefficient_key(slot, k) for k in range(basis.count)], weight[:, None] * projected)

        corner_keys = []
        for end, order in switches.functionals:
            if slot.orientation == VERTICAL:
                corner_keys.append(corner_key(slot.line, slot.segment + end, slot.role, order))
            else:
                corner_keys.append(corner_key(slot.segment + end, slot.line, order, slot.role))
        acc.add(corner_keys, weight[:, None] * S)

    def add_element(self, acc: BlockAccumulator, i: int, j: int, x: np.ndarray, y: np.ndarray,
                    kx: int, ky: int, weight: Optional[np.ndarray] = None):
        """Add weight * ∂^(kx, ky) u_e(x, y) using element (i, j)'s local form"""
        w = np.ones(x.size) if weight is None else weight
        e = self.mesh.element_index(i, j)
        interior = self.interior_basis(i, j)
        g_keys = [('g', e, k) for k in range(interior.count)]

        if self.kind == KIND_NC:
            acc.add(g_keys, w[:, None] * interior.eval(x, y, kx, ky))
            return

        ox, oy = self.continuity
        (a1, b1), (a2, b2) = self.mesh.x.interval(i), self.mesh.y.interval(j)
        sx, sy = self._switches(ox, a1, b1), self._switches(oy, a2, b2)
        Sx, Sy = sx.eval(x, kx), sy.eval(y, ky)

        bx = interior.x_set.eval(x, kx) - Sx @ self._trace_matrix(interior.x_set, sx)
        by = interior.y_set.eval(y, ky) - Sy @ self._trace_matrix(interior.y_set, sy)
        acc.add(g_keys, w[:, None] * np.einsum('na,nb->nab', bx, by).reshape(x.size, -1))

        for a, (ea, oa) in enumerate(sx.functionals):
            self.add_edge(acc, EdgeSlot(VERTICAL, i + ea, j, oa), y, ky, w * Sx[:, a])
        for b, (eb, ob) in enumerate(sy.functionals):
            self.add_edge(acc, EdgeSlot(HORIZONTAL, j + eb, i, ob), x, kx, w * Sy[:, b])

        corner_keys, columns = [], []
        for a, (ea, oa) in enumerate(sx.functionals):
            for b, (eb, ob) in enumerate(sy.functionals):
                corner_keys.append(corner_key(i + ea, j + eb, oa, ob))
                columns.append(-w * Sx[:, a] * Sy[:, b])
        acc.add(corner_keys, np.column_stack(columns))


def build_field_2d(mesh: Mesh2D, kind: str, p: int, m: Optional[int] = None, boundary_spec=None,
                   family: str = FAMILY_LEGENDRE) -> FceField2D:
    """
    Build a 2D field

    Args:
        mesh: Tensor mesh
        kind: 'C1', 'C0', 'MixedC1x', 'MixedC1y' or 'NC'
        p: Interior basis order per direction
        m: Edge basis order (defaults to p)
        boundary_spec: Optional BoundarySpec applied after construction
        family: 'legendre' or 'sinusoid'

    Returns:
        FceField2D
    """
    field_ = FceField2D(mesh, kind, int(p), int(p if m is None else m), family)
    if boundary_spec is not None:
        from .constraints import apply_boundary
        field_ = apply_boundary(field_, boundary_spec)
    return field_


def _check_segment(field_: FceField2D, slot: EdgeSlot, t: np.ndarray):
    if not field_._slot_exists(slot):
        raise ConfigurationError(f"Edge slot {slot} does not exist in a {field_.kind} field")
    a, b = field_.edge_interval(slot)
    AffineMap(a, b).check(t)


def edge_eval(field_: FceField2D, slot: EdgeSlot, t: float, deriv: int = 0) -> AffineFunctional:
    """Affine functional of the slot's edge function (d^deriv/dt^deriv) at t"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_segment(field_, slot, t)
    acc = BlockAccumulator(t.size)
    field_.add_edge(acc, slot, t, deriv, np.ones(t.size))
    return acc.to_block(field_.layout).functional(0)


def eval_block_2d(field_: FceField2D, element: Tuple[int, int], x, y,
                  deriv: Tuple[int, int] = (0, 0)) -> AffineBlock:
    """Affine functionals of ∂^deriv u at points (x, y), all with element (i, j)'s local form"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    i, j = element
    AffineMap(*field_.mesh.x.interval(i)).check(x)
    AffineMap(*field_.mesh.y.interval(j)).check(y)
    acc = BlockAccumulator(x.size)
    field_.add_element(acc, i, j, x, y, deriv[0], deriv[1])
    return acc.to_block(field_.layout)


def eval_affine_2d(field_: FceField2D, point: Tuple[float, float], deriv: Tuple[int, int] = (0, 0),
                   element: Optional[Tuple[int, int]] = None) -> AffineFunctional:
    """
    Affine functional of ∂^(kx, ky) u at a point

    Args:
        field_: 2D field
        point: (x, y) inside the mesh
        deriv: (kx, ky) derivative orders, each 0..2
        element: (i, j) whose local form is used; located (lower index on shared edges) when None

    Returns:
        AffineFunctional over the free parameters
    """
    x, y = point
    if element is None:
        ix, iy = field_.mesh.locate([x], [y])
        element = (int(ix[0]), int(iy[0]))
    return eval_block_2d(field_, element, [x], [y], deriv).functional(0)


def eval_points_2d(field_: FceField2D, x, y, deriv: Tuple[int, int] = (0, 0)) -> AffineBlock:
    """Affine functionals at scattered points, each using its located element"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ix, iy = field_.mesh.locate(x, y)
    owner = ix * field_.mesh.Ny + iy
    matrix = np.zeros((x.size, field_.free_count))
    offset = np.zeros(x.size)
    for e in np.unique(owner):
        mask = owner == e
        block = eval_block_2d(field_, field_.mesh.element_ij(int(e)), x[mask], y[mask], deriv)
        matrix[mask] = block.matrix
        offset[mask] = block.offset
    return AffineBlock(matrix, offset)


def materialize_2d(field_: FceField2D, theta, x, y, deriv: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """Values of ∂^deriv u at points (x, y) for parameter vector theta"""
    theta = field_.layout.check(theta)
    return eval_points_2d(field_, x, y, deriv).evaluate(theta)
