"""
Boundary and Relative Constraints
Exact or least-squares boundary conditions and the reparameterization θ -> Θ for eliminated parameters
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ConfigurationError, ConstraintError, DataError, ModeError
from .fce1d import FceField1D, KIND_C1, KIND_NC, eval_affine_1d, interface_key_1d
from .fce2d import (
    HORIZONTAL, VERTICAL, EdgeSlot, FceField2D, FixedTrace, LinkedTrace, corner_key, eval_points_2d,
)
from .layout import AffineBlock, Key

logger = logging.getLogger(__name__)


__all__ = [
    'DIRICHLET', 'NEUMANN', 'ROBIN', 'EXACT', 'LEAST_SQUARES',
    'BoundaryCondition', 'BoundarySpec', 'PointRef', 'RelativeConstraint', 'RelativeEdgeConstraint',
    'Elimination', 'Reparameterization', 'apply_boundary', 'build_reparameterization',
    'supports_exact', 'relative_supports_exact', 'condition_block', 'relative_blocks',
]

DIRICHLET = 'dirichlet'
NEUMANN = 'neumann'
ROBIN = 'robin'

EXACT = 'exact'
LEAST_SQUARES = 'least_squares'

COMPATIBILITY_TOL = 1e-10

_SIDES_1D = ('left', 'right')
_SIDES_2D = ('left', 'right', 'bottom', 'top')
_PROCESS_ORDER = {DIRICHLET: 0, NEUMANN: 1, ROBIN: 2}

Field = Union[FceField1D, FceField2D]
# 2D boundary data: c(x, y, kx, ky) -> partial derivative values
BoundaryData = Union[float, Callable[..., np.ndarray]]


# ============================================================================
# BOUNDARY CONDITIONS
# ============================================================================

@dataclass(frozen=True)
class BoundaryCondition:
    """
    a·u + b·∂u/∂n = data on one side

    The normal derivative is the coordinate derivative (∂/∂x on left/right,
    ∂/∂y on bottom/top), not the outward normal.
    """
    side: str
    kind: str
    data: BoundaryData
    mode: str = EXACT
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in _PROCESS_ORDER:
            raise ConfigurationError(f"Unknown boundary condition kind: {self.kind}")
        if self.mode not in (EXACT, LEAST_SQUARES):
            raise ConfigurationError(f"Unknown enforcement mode: {self.mode}")
        if self.kind == ROBIN and self.a == 0.0 and self.b == 0.0:
            raise ConfigurationError("Robin condition needs a or b non-zero")

    @classmethod
    def dirichlet(cls, side: str, data: BoundaryData, mode: str = EXACT) -> 'BoundaryCondition':
        return cls(side, DIRICHLET, data, mode, 1.0, 0.0)

    @classmethod
    def neumann(cls, side: str, data: BoundaryData, mode: str = EXACT) -> 'BoundaryCondition':
        return cls(side, NEUMANN, data, mode, 0.0, 1.0)

    @classmethod
    def robin(cls, side: str, a: float, b: float, data: BoundaryData, mode: str = EXACT) -> 'BoundaryCondition':
        return cls(side, ROBIN, data, mode, float(a), float(b))

    def with_mode(self, mode: str) -> 'BoundaryCondition':
        return BoundaryCondition(self.side, self.kind, self.data, mode, self.a, self.b)

    @property
    def weights(self) -> Tuple[float, float]:
        """(value weight, normal-derivative weight)"""
        if self.kind == DIRICHLET:
            return 1.0, 0.0
        if self.kind == NEUMANN:
            return 0.0, 1.0
        return self.a, self.b


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions of a problem, applied Dirichlet first, then Neumann, then Robin"""
    conditions: Tuple[BoundaryCondition, ...] = ()

    def __iter__(self):
        return iter(sorted(self.conditions, key=lambda c: _PROCESS_ORDER[c.kind]))

    def __len__(self):
        return len(self.conditions)

    def with_mode(self, mode: str) -> 'BoundarySpec':
        return BoundarySpec(tuple(c.with_mode(mode) for c in self.conditions))


def _normal_continuity(field_: Field, side: str) -> int:
    if field_.dim == 1:
        return field_.continuity_order
    ox, oy = field_.continuity
    return ox if side in ('left', 'right') else oy


def supports_exact(field_: Field, condition: BoundaryCondition) -> bool:
    """Whether the field kind can absorb the condition exactly"""
    normal = _normal_continuity(field_, condition.side)
    if condition.kind == DIRICHLET or (condition.kind == ROBIN and condition.b == 0.0):
        return normal >= 0
    return normal >= 1


def _check_sides(field_: Field, conditions: Sequence[BoundaryCondition]):
    sides = _SIDES_1D if field_.dim == 1 else _SIDES_2D
    for c in conditions:
        if c.side not in sides:
            raise ConfigurationError(f"Unknown side '{c.side}' for a {field_.dim}D field; expected one of {sides}")


class _Installer:
    """Accumulates fixed values, edge sources and eliminations before the field is rebuilt"""

    def __init__(self, field_: Field, mismatch_error=DataError):
        self.field = field_
        self.fixed: Dict[Key, float] = dict(field_.fixed)
        self.edge_sources: Dict[EdgeSlot, Any] = dict(getattr(field_, 'edge_sources', {}))
        self.eliminations: List[Elimination] = list(field_.eliminations)
        self.mismatch_error = mismatch_error

    def _targets(self):
        return {e.target for e in self.eliminations}

    def fix(self, key: Key, value: float, label: str):
        value = float(value)
        if key in self._targets():
            raise ConstraintError(f"Parameter {key} is already eliminated; cannot fix it ({label})")
        if key in self.fixed:
            mismatch = abs(self.fixed[key] - value)
            if mismatch > COMPATIBILITY_TOL:
                raise self.mismatch_error(
                    f"Incompatible data at {key} ({label}): {self.fixed[key]} vs {value}", mismatch
                )
            return
        self.fixed[key] = value

    def relate(self, target: Key, source: Key, scale: float, offset: float, label: str):
        """Install target = scale * source + offset, fixing whichever side is already known"""
        if target in self.fixed and source in self.fixed:
            self.fix(target, scale * self.fixed[source] + offset, label)
        elif source in self.fixed:
            self.fix(target, scale * self.fixed[source] + offset, label)
        elif target in self.fixed:
            if scale == 0.0:
                self.fix(target, offset, label)
            else:
                self.fix(source, (self.fixed[target] - offset) / scale, label)
        else:
            if target in self._targets():
                raise ConstraintError(f"Parameter {target} is eliminated twice ({label})")
            self.eliminations.append(Elimination(target, (source,), coefficients=(scale,), offset=offset, label=label))

    def set_edge(self, slot: EdgeSlot, source):
        if slot in self.edge_sources:
            raise ConfigurationError(f"Edge slot {slot} already carries boundary data")
        self.edge_sources[slot] = source

    def build(self, **extra) -> Field:
        changes = dict(fixed=self.fixed, eliminations=tuple(self.eliminations), **extra)
        if self.field.dim == 2:
            changes['edge_sources'] = self.edge_sources
        return self.field.with_updates(**changes)


def _scalar(value) -> float:
    return float(np.asarray(value, dtype=float).ravel()[0])


def _apply_1d(inst: _Installer, c: BoundaryCondition):
    field_ = inst.field
    index = 0 if c.side == 'left' else field_.partition.N
    value = float(c.data)
    a, b = c.weights
    label = f"{c.kind} on {c.side}"

    if b == 0.0:
        inst.fix(interface_key_1d(index, 0), value / a, label)
    elif a == 0.0:
        inst.fix(interface_key_1d(index, 1), value / b, label)
    else:
        inst.relate(interface_key_1d(index, 1), interface_key_1d(index, 0), -a / b, value / b, label)


def _side_geometry(field_: FceField2D, side: str) -> Tuple[str, int, float]:
    mesh = field_.mesh
    if side == 'left':
        return VERTICAL, 0, mesh.X[0]
    if side == 'right':
        return VERTICAL, mesh.Nx, mesh.X[-1]
    if side == 'bottom':
        return HORIZONTAL, 0, mesh.Y[0]
    return HORIZONTAL, mesh.Ny, mesh.Y[-1]


def _trace(data: Callable, orientation: str, position: float, normal_order: int, scale: float = 1.0):
    """Tangential trace t -> scale * ∂_n^normal_order ∂_t^d data on a line"""
    def trace(t, d=0):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        line = np.full_like(t, position)
        if orientation == VERTICAL:
            return scale * np.asarray(data(line, t, normal_order, d), dtype=float)
        return scale * np.asarray(data(t, line, d, normal_order), dtype=float)
    return trace


def _apply_2d(inst: _Installer, c: BoundaryCondition):
    field_ = inst.field
    orientation, line, position = _side_geometry(field_, c.side)
    ox, oy = field_.continuity
    tangential = oy if orientation == VERTICAL else ox
    lines = field_.mesh.Y if orientation == VERTICAL else field_.mesh.X
    segments = len(lines) - 1
    a, b = c.weights
    label = f"{c.kind} on {c.side}"

    def corner(J: int, normal: int, t_order: int) -> Key:
        if orientation == VERTICAL:
            return corner_key(line, J, normal, t_order)
        return corner_key(J, line, t_order, normal)

    def data_at(J: int, t_order: int) -> float:
        trace = _trace(c.data, orientation, position, 0)
        return _scalar(trace([lines[J]], t_order))

    if b == 0.0 or a == 0.0:
        role = 0 if b == 0.0 else 1
        weight = a if b == 0.0 else b
        for j in range(segments):
            slot = EdgeSlot(orientation, line, j, role)
            inst.set_edge(slot, FixedTrace(_trace(c.data, orientation, position, 0, 1.0 / weight)))
        for J in range(segments + 1):
            for t_order in range(tangential + 1):
                inst.fix(corner(J, role, t_order), data_at(J, t_order) / weight, label)
        return

    for j in range(segments):
        inst.set_edge(EdgeSlot(orientation, line, j, 1), LinkedTrace(
            EdgeSlot(orientation, line, j, 0), -a / b, _trace(c.data, orientation, position, 0, 1.0 / b)
        ))
    for J in range(segments + 1):
        for t_order in range(tangential + 1):
            inst.relate(corner(J, 1, t_order), corner(J, 0, t_order), -a / b, data_at(J, t_order) / b, label)


def apply_boundary(field_: Field, spec: Union[BoundarySpec, Iterable[BoundaryCondition]]) -> Field:
    """
    Install boundary conditions on a field

    Args:
        field_: 1D or 2D field
        spec: BoundarySpec or iterable of BoundaryCondition

    Returns:
        Field with exact conditions absorbed into fixed entries, edge sources or
        eliminations, and least-squares conditions registered for assembly
    """
    spec = spec if isinstance(spec, BoundarySpec) else BoundarySpec(tuple(spec))
    conditions = list(spec)
    _check_sides(field_, conditions)

    inst = _Installer(field_)
    ls = list(field_.ls_conditions)
    for c in conditions:
        if c.mode == LEAST_SQUARES:
            ls.append(c)
            continue
        if not supports_exact(field_, c):
            raise ModeError(f"Exact {c.kind} on side '{c.side}' is not available for a {field_.kind} field")
        if field_.dim == 1:
            _apply_1d(inst, c)
        else:
            _apply_2d(inst, c)

    updated = inst.build(ls_conditions=tuple(ls))
    logger.debug(
        f"Boundary applied: {len(conditions)} conditions, {len(ls)} least-squares, "
        f"free {field_.free_count} -> {updated.free_count}"
    )
    return updated


def condition_block(field_: Field, condition: BoundaryCondition, points: Optional[np.ndarray] = None) -> AffineBlock:
    """
    Residual rows a·u + b·∂u/∂n - data for a least-squares condition

    Args:
        field_: Field the condition is registered on
        condition: Boundary condition
        points: Positions along a 2D side (ignored in 1D)

    Returns:
        AffineBlock over the field layout
    """
    a, b = condition.weights
    if field_.dim == 1:
        x = field_.partition.a if condition.side == 'left' else field_.partition.b
        row = np.zeros(field_.free_count)
        offset = -float(condition.data)
        for weight, deriv in ((a, 0), (b, 1)):
            if weight != 0.0:
                f = eval_affine_1d(field_, x, deriv)
                row += weight * f.dense()
                offset += weight * f.offset
        return AffineBlock(row[None, :], np.array([offset]))

    orientation, _, position = _side_geometry(field_, condition.side)
    t = np.atleast_1d(np.asarray(points, dtype=float))
    line = np.full_like(t, position)
    x, y = (line, t) if orientation == VERTICAL else (t, line)
    normal = (1, 0) if orientation == VERTICAL else (0, 1)

    matrix = np.zeros((t.size, field_.free_count))
    offset = -np.asarray(condition.data(x, y, 0, 0), dtype=float)
    for weight, deriv in ((a, (0, 0)), (b, normal)):
        if weight != 0.0:
            block = eval_points_2d(field_, x, y, deriv)
            matrix += weight * block.matrix
            offset += weight * block.offset
    return AffineBlock(matrix, offset)


# ============================================================================
# RELATIVE CONSTRAINTS
# ============================================================================

@dataclass(frozen=True)
class PointRef:
    """u (deriv 0) or u' (deriv 1) at a location"""
    location: float
    deriv: int = 0

    def __post_init__(self):
        if self.deriv not in (0, 1):
            raise ConfigurationError(f"Point references support derivative order 0 or 1, got {self.deriv}")


@dataclass(frozen=True)
class RelativeConstraint:
    """
    target = f(sources) + offset

    f is linear (Σ coefficients_i * source_i) or a nonlinear callable of the
    source values with an analytic gradient.
    """
    target: PointRef
    sources: Tuple[PointRef, ...]
    coefficients: Optional[Tuple[float, ...]] = None
    offset: float = 0.0
    function: Optional[Callable[[np.ndarray], float]] = None
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    mode: str = EXACT

    def __post_init__(self):
        if self.mode not in (EXACT, LEAST_SQUARES):
            raise ConfigurationError(f"Unknown enforcement mode: {self.mode}")
        if (self.coefficients is None) == (self.function is None):
            raise ConfigurationError("Relative constraint needs exactly one of coefficients or function")
        if self.function is not None and self.gradient is None:
            raise ConfigurationError("Nonlinear relative constraint needs a gradient")
        if self.coefficients is not None and len(self.coefficients) != len(self.sources):
            raise ConfigurationError(
                f"{len(self.coefficients)} coefficients for {len(self.sources)} sources"
            )

    @classmethod
    def linear(cls, target: PointRef, sources: Sequence[PointRef], coefficients: Sequence[float],
               offset: float = 0.0, mode: str = EXACT) -> 'RelativeConstraint':
        return cls(target, tuple(sources), tuple(float(c) for c in coefficients), float(offset), mode=mode)

    @classmethod
    def nonlinear(cls, target: PointRef, sources: Sequence[PointRef], function: Callable, gradient: Callable,
                  offset: float = 0.0, mode: str = EXACT) -> 'RelativeConstraint':
        return cls(target, tuple(sources), None, float(offset), function, gradient, mode)

    @property
    def linear_form(self) -> bool:
        return self.coefficients is not None

    def with_mode(self, mode: str) -> 'RelativeConstraint':
        return RelativeConstraint(self.target, self.sources, self.coefficients, self.offset,
                                  self.function, self.gradient, mode)


@dataclass(frozen=True)
class RelativeEdgeConstraint:
    """u(target_x, y) = u(source_x, y) + jump(y) along two vertical mesh lines"""
    target_x: float
    source_x: float
    jump: Callable[[np.ndarray, int], np.ndarray]
    mode: str = EXACT

    def __post_init__(self):
        if self.mode not in (EXACT, LEAST_SQUARES):
            raise ConfigurationError(f"Unknown enforcement mode: {self.mode}")

    def with_mode(self, mode: str) -> 'RelativeEdgeConstraint':
        return RelativeEdgeConstraint(self.target_x, self.source_x, self.jump, mode)


@dataclass(frozen=True)
class Elimination:
    """Θ[target] := f(Θ[sources]) + offset"""
    target: Key
    sources: Tuple[Key, ...]
    coefficients: Optional[Tuple[float, ...]] = None
    offset: float = 0.0
    function: Optional[Callable[[np.ndarray], float]] = None
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ''

    @property
    def linear(self) -> bool:
        return self.coefficients is not None

    def value(self, values: np.ndarray) -> float:
        if self.linear:
            return float(np.dot(self.coefficients, values) + self.offset)
        return float(self.function(values)) + self.offset

    def grad(self, values: np.ndarray) -> np.ndarray:
        if self.linear:
            return np.asarray(self.coefficients, dtype=float)
        return np.atleast_1d(np.asarray(self.gradient(values), dtype=float))


class Reparameterization:
    """
    Map from independent parameters θ to the full layout vector Θ

    Eliminated entries are evaluated in dependency order from θ and the
    field's fixed values. `field` is the field with relative constraints
    installed; assembly works with it.
    """

    def __init__(self, field_: Field, eliminations: Sequence[Elimination]):
        self.field = field_
        layout = field_.layout
        for e in eliminations:
            if layout.is_fixed(e.target):
                raise ConstraintError(f"Eliminated parameter {e.target} is already fixed ({e.label})")
            if layout.index(e.target) is None:
                raise ConfigurationError(f"Eliminated parameter {e.target} is not part of the layout")
            for s in e.sources:
                if s not in layout:
                    raise ConfigurationError(f"Source parameter {s} is not part of the layout")

        self.eliminations: Tuple[Elimination, ...] = _topological_order(eliminations)
        targets = {layout.index(e.target) for e in self.eliminations}
        self.free_index = np.array([i for i in range(layout.size) if i not in targets], dtype=int)
        self._target_index = [layout.index(e.target) for e in self.eliminations]
        self._source_index = [[layout.index(s) for s in e.sources] for e in self.eliminations]

    @property
    def size(self) -> int:
        """Independent parameter count"""
        return self.free_index.size

    @property
    def full_size(self) -> int:
        return self.field.layout.size

    @property
    def affine(self) -> bool:
        return all(e.linear for e in self.eliminations)

    def _source_values(self, Theta: np.ndarray, k: int) -> np.ndarray:
        layout = self.field.layout
        return np.array([
            Theta[idx] if idx is not None else layout.fixed_value(key)
            for idx, key in zip(self._source_index[k], self.eliminations[k].sources)
        ])

    def full(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size != self.size:
            raise ConfigurationError(f"θ has length {theta.size}, reparameterization expects {self.size}")
        Theta = np.zeros(self.full_size)
        Theta[self.free_index] = theta
        for k, e in enumerate(self.eliminations):
            Theta[self._target_index[k]] = e.value(self._source_values(Theta, k))
        return Theta

    def jacobian(self, theta) -> np.ndarray:
        """dΘ/dθ, shape (full_size, size)"""
        Theta = self.full(theta)
        E = np.zeros((self.full_size, self.size))
        E[self.free_index, np.arange(self.size)] = 1.0
        for k, e in enumerate(self.eliminations):
            grad = e.grad(self._source_values(Theta, k))
            row = np.zeros(self.size)
            for g, idx in zip(grad, self._source_index[k]):
                if idx is not None:
                    row += g * E[idx]
            E[self._target_index[k]] = row
        return E

    def reduce(self, Theta) -> np.ndarray:
        """Independent entries of a full vector"""
        return np.asarray(Theta, dtype=float)[self.free_index]

    def __repr__(self):
        return f"Reparameterization(size={self.size}, eliminated={len(self.eliminations)}, affine={self.affine})"


def _topological_order(eliminations: Sequence[Elimination]) -> Tuple[Elimination, ...]:
    by_target: Dict[Key, Elimination] = {}
    for e in eliminations:
        if e.target in by_target:
            raise ConstraintError(f"Parameter {e.target} is eliminated more than once")
        by_target[e.target] = e

    ordered: List[Elimination] = []
    state: Dict[Key, int] = {}

    def visit(key: Key, path: Tuple[Key, ...]):
        if state.get(key) == 2:
            return
        if state.get(key) == 1:
            raise ConstraintError(f"Cyclic eliminations: {' -> '.join(map(str, path + (key,)))}")
        state[key] = 1
        for s in by_target[key].sources:
            if s in by_target:
                visit(s, path + (key,))
        state[key] = 2
        ordered.append(by_target[key])

    for e in eliminations:
        visit(e.target, ())
    return tuple(ordered)


def _point_key(field_: FceField1D, ref: PointRef) -> Key:
    if field_.kind == KIND_NC:
        raise ModeError("Exact relative constraints need a field with interface parameters (C0 or C1)")
    if ref.deriv == 1 and field_.kind != KIND_C1:
        raise ModeError(f"Exact derivative references need a C1 field, got {field_.kind}")
    index = field_.partition.breakpoint_index(ref.location)
    if index is None:
        raise ConfigurationError(f"Exact relative constraints must reference breakpoints, got x={ref.location}")
    return interface_key_1d(index, ref.deriv)


def _install_edge_constraint(inst: _Installer, c: RelativeEdgeConstraint):
    field_ = inst.field
    if field_.kind == KIND_NC:
        raise ModeError("Exact relative edge constraints need a field with edge functions")
    It = field_.mesh.x.breakpoint_index(c.target_x)
    Is = field_.mesh.x.breakpoint_index(c.source_x)
    if It is None or Is is None:
        raise ConfigurationError(f"Relative edge lines must be mesh lines, got x={c.target_x} and x={c.source_x}")
    if It == Is:
        raise ConstraintError("Relative edge constraint relates a line to itself")

    label = f"u({c.target_x}, y) = u({c.source_x}, y) + jump"
    for j in range(field_.mesh.Ny):
        inst.set_edge(EdgeSlot(VERTICAL, It, j, 0), LinkedTrace(EdgeSlot(VERTICAL, Is, j, 0), 1.0, c.jump))

    oy = field_.continuity[1]
    for J, Y in enumerate(field_.mesh.Y):
        for t_order in range(oy + 1):
            g = _scalar(c.jump(np.array([Y]), t_order))
            inst.relate(corner_key(It, J, 0, t_order), corner_key(Is, J, 0, t_order), 1.0, g, label)


def relative_supports_exact(field_: Field, constraint) -> bool:
    """Whether a relative constraint can be installed as an elimination on this field"""
    if field_.kind == KIND_NC:
        return False
    if isinstance(constraint, RelativeEdgeConstraint):
        return field_.dim == 2
    if field_.dim != 1:
        return False
    refs = (constraint.target,) + tuple(constraint.sources)
    if any(r.deriv == 1 for r in refs) and field_.kind != KIND_C1:
        return False
    return all(field_.partition.breakpoint_index(r.location) is not None for r in refs)


def build_reparameterization(field_: Field, relative=()) -> Reparameterization:
    """
    Install relative constraints and build θ -> Θ

    Args:
        field_: Field with boundary conditions applied
        relative: RelativeConstraint (1D) or RelativeEdgeConstraint (2D) items

    Returns:
        Reparameterization whose field carries linked slots and registered least-squares rows
    """
    inst = _Installer(field_, mismatch_error=ConstraintError)
    ls = list(field_.ls_relative)

    for c in relative:
        if c.mode == LEAST_SQUARES:
            ls.append(c)
            continue
        if isinstance(c, RelativeEdgeConstraint):
            if field_.dim != 2:
                raise ConfigurationError("Relative edge constraints need a 2D field")
            _install_edge_constraint(inst, c)
            continue
        if field_.dim != 1:
            raise ConfigurationError("Point relative constraints need a 1D field")

        target = _point_key(field_, c.target)
        sources = tuple(_point_key(field_, s) for s in c.sources)
        if target in inst.fixed:
            raise ConstraintError(f"Relative constraint targets {target}, which boundary data already fixes")
        if target in sources:
            raise ConstraintError(f"Relative constraint on {target} references itself")
        inst.eliminations.append(Elimination(
            target, sources, c.coefficients, c.offset, c.function, c.gradient,
            label=f"{c.target} from {c.sources}",
        ))

    updated = inst.build(ls_relative=tuple(ls))
    reparam = Reparameterization(updated, updated.eliminations)
    logger.debug(f"Reparameterization built: {reparam}")
    return reparam


def relative_blocks(field_: Field, constraint, points: Optional[np.ndarray] = None
                    ) -> Tuple[AffineBlock, List[AffineBlock], np.ndarray]:
    """
    Target and source functionals of a least-squares relative constraint

    Returns:
        (target block, source blocks, offsets) so the residual is
        target - f(sources) - offsets row by row
    """
    if isinstance(constraint, RelativeEdgeConstraint):
        y = np.atleast_1d(np.asarray(points, dtype=float))
        target = eval_points_2d(field_, np.full_like(y, constraint.target_x), y)
        source = eval_points_2d(field_, np.full_like(y, constraint.source_x), y)
        return target, [source], np.asarray(constraint.jump(y, 0), dtype=float)

    def block(ref: PointRef) -> AffineBlock:
        f = eval_affine_1d(field_, ref.location, ref.deriv)
        return AffineBlock(f.dense()[None, :], np.array([f.offset]))

    return block(constraint.target), [block(s) for s in constraint.sources], np.array([constraint.offset])
