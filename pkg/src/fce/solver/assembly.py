"""
Residual Assembly
Collocation rows for the PDE, continuity that the field does not carry, least-squares boundary and relative conditions
"""

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..constraints import (
    Reparameterization, RelativeEdgeConstraint, build_reparameterization, condition_block, relative_blocks,
)
from ..exceptions import ConfigurationError, ModeError
from ..fce1d import eval_block_1d
from ..fce2d import eval_block_2d
from ..layout import AffineBlock
from .collocation import CollocationSet
from .problem import ProblemSpec

logger = logging.getLogger(__name__)


__all__ = [
    'ScaleFactor', 'ScalingSpec', 'LinearRows', 'NonlinearPdeRows', 'NonlinearRelativeRows',
    'ResidualSystem', 'assemble',
]


# ============================================================================
# SCALING
# ============================================================================

_FACTOR = re.compile(r'^\s*(?:(?P<coef>[-+0-9.eE]+)\s*\*\s*)?h\s*\^\s*(?P<power>[-+]?[0-9.]+)\s*$')


@dataclass(frozen=True)
class ScaleFactor:
    """coefficient * h^h_power"""
    coefficient: float = 1.0
    h_power: float = 0.0

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ConfigurationError(f"Scale factors must be positive, got {self.coefficient}")

    @classmethod
    def parse(cls, token: str) -> 'ScaleFactor':
        """'2.5', 'h^-4' or '2*h^-4'"""
        match = _FACTOR.match(token)
        try:
            if match:
                return cls(float(match.group('coef') or 1.0), float(match.group('power')))
            return cls(float(token))
        except ValueError as exc:
            raise ConfigurationError(f"Cannot parse scale factor '{token}'") from exc

    def value(self, h: float) -> float:
        return self.coefficient * h ** self.h_power

    def __str__(self):
        if self.h_power == 0.0:
            return f"{self.coefficient:g}"
        prefix = '' if self.coefficient == 1.0 else f"{self.coefficient:g}*"
        return f"{prefix}h^{self.h_power:g}"


@dataclass(frozen=True)
class ScalingSpec:
    """Row weights: σ on boundary rows, σ0 on value continuity, σ1 on derivative continuity"""
    boundary: ScaleFactor = ScaleFactor()
    value: ScaleFactor = ScaleFactor()
    derivative: ScaleFactor = ScaleFactor()

    @classmethod
    def parse(cls, text: str) -> 'ScalingSpec':
        """'s,s0,s1' with each token a number or a power of h"""
        tokens = text.split(',')
        if len(tokens) != 3:
            raise ConfigurationError(f"Scaling needs three comma-separated factors, got '{text}'")
        return cls(*(ScaleFactor.parse(t) for t in tokens))

    @classmethod
    def sinusoid_default(cls, problem_order: int) -> 'ScalingSpec':
        """h^-4, h^-4, h^-2 for second-order problems; h^-2 on boundary and value rows for first-order ones"""
        if problem_order >= 2:
            return cls(ScaleFactor(1.0, -4.0), ScaleFactor(1.0, -4.0), ScaleFactor(1.0, -2.0))
        return cls(ScaleFactor(1.0, -2.0), ScaleFactor(1.0, -2.0), ScaleFactor())

    def resolve(self, h: float) -> Tuple[float, float, float]:
        return self.boundary.value(h), self.value.value(h), self.derivative.value(h)

    def __str__(self):
        return f"{self.boundary},{self.value},{self.derivative}"


# ============================================================================
# ROW BLOCKS
# ============================================================================

class LinearRows:
    """Affine rows A Θ + b"""
    affine = True

    def __init__(self, name: str, block: AffineBlock):
        self.name = name
        self.block = block

    @property
    def rows(self) -> int:
        return self.block.rows

    def residual(self, Theta: np.ndarray) -> np.ndarray:
        return self.block.matrix @ Theta + self.block.offset

    def jacobian(self, Theta: np.ndarray) -> np.ndarray:
        return self.block.matrix


class NonlinearPdeRows:
    """A Θ + b + N(U Θ + u0), with U Θ + u0 the field values at the same points"""
    affine = False

    def __init__(self, name: str, block: AffineBlock, values: AffineBlock,
                 nonlinear: Callable[[np.ndarray], np.ndarray], derivative: Callable[[np.ndarray], np.ndarray]):
        self.name = name
        self.block = block
        self.values = values
        self.nonlinear = nonlinear
        self.derivative = derivative

    @property
    def rows(self) -> int:
        return self.block.rows

    def residual(self, Theta: np.ndarray) -> np.ndarray:
        u = self.values.evaluate(Theta)
        return self.block.evaluate(Theta) + self.nonlinear(u)

    def jacobian(self, Theta: np.ndarray) -> np.ndarray:
        u = self.values.evaluate(Theta)
        return self.block.matrix + self.derivative(u)[:, None] * self.values.matrix


class NonlinearRelativeRows:
    """weight * (T Θ + t0 - f(S_1 Θ + s_1, ...) - offset) for a nonlinear relative condition"""
    affine = False

    def __init__(self, name: str, target: AffineBlock, sources: Sequence[AffineBlock],
                 function: Callable, gradient: Callable, offset: np.ndarray, weight: float = 1.0):
        self.name = name
        self.target = target
        self.sources = list(sources)
        self.function = function
        self.gradient = gradient
        self.offset = np.asarray(offset, dtype=float)
        self.weight = weight

    @property
    def rows(self) -> int:
        return self.target.rows

    def _source_values(self, Theta: np.ndarray) -> np.ndarray:
        return np.array([s.evaluate(Theta) for s in self.sources])

    def residual(self, Theta: np.ndarray) -> np.ndarray:
        values = self._source_values(Theta)
        f = np.array([self.function(values[:, r]) for r in range(self.rows)])
        return self.weight * (self.target.evaluate(Theta) - f - self.offset)

    def jacobian(self, Theta: np.ndarray) -> np.ndarray:
        values = self._source_values(Theta)
        J = self.target.matrix.copy()
        for r in range(self.rows):
            grad = np.atleast_1d(self.gradient(values[:, r]))
            for g, s in zip(grad, self.sources):
                J[r] -= g * s.matrix[r]
        return self.weight * J


# ============================================================================
# RESIDUAL SYSTEM
# ============================================================================

class ResidualSystem:
    """
    Stacked residual r(θ) over the independent parameters

    Row blocks are expressed over the full layout vector Θ; the
    reparameterization supplies Θ(θ) and dΘ/dθ.
    """

    def __init__(self, field_, reparam: Reparameterization, blocks: Sequence, problem: Optional[ProblemSpec] = None):
        self.field = field_
        self.reparam = reparam
        self.blocks = list(blocks)
        self.problem = problem

    @property
    def affine(self) -> bool:
        return self.reparam.affine and all(b.affine for b in self.blocks)

    @property
    def n_rows(self) -> int:
        return sum(b.rows for b in self.blocks)

    @property
    def n_cols(self) -> int:
        return self.reparam.size

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    def row_counts(self) -> Dict[str, int]:
        """Rows per block kind (pde, continuity, boundary, relative)"""
        counts: Dict[str, int] = {}
        for b in self.blocks:
            kind = b.name.split(':')[0]
            counts[kind] = counts.get(kind, 0) + b.rows
        return counts

    def full(self, theta) -> np.ndarray:
        return self.reparam.full(theta)

    def residual(self, theta) -> np.ndarray:
        Theta = self.reparam.full(theta)
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([b.residual(Theta) for b in self.blocks])

    def jacobian(self, theta) -> np.ndarray:
        Theta = self.reparam.full(theta)
        if not self.blocks:
            return np.zeros((0, self.n_cols))
        J_full = np.vstack([b.jacobian(Theta) for b in self.blocks])
        return J_full @ self.reparam.jacobian(theta)

    def linear_system(self) -> Tuple[np.ndarray, np.ndarray]:
        """(H, S) with r(θ) = H θ - S"""
        if not self.affine:
            raise ModeError("Only affine residual systems have a constant matrix form")
        zero = np.zeros(self.n_cols)
        H = self.jacobian(zero)
        S = -self.residual(zero)
        return H, S

    def __repr__(self):
        return f"ResidualSystem(rows={self.n_rows}, cols={self.n_cols}, affine={self.affine})"


# ============================================================================
# ASSEMBLY
# ============================================================================

def _check_pairing(problem: ProblemSpec, field_):
    if problem.dim != field_.dim:
        raise ConfigurationError(f"{problem.dim}D problem cannot use a {field_.dim}D field")
    for axis, (have, need) in enumerate(zip(field_.continuity, problem.required_continuity)):
        if have > need:
            raise ConfigurationError(
                f"{field_.kind} field carries C{have} continuity along axis {axis}, "
                f"but the problem only requires C{need}"
            )


def _element_block(field_, element, coords, deriv) -> AffineBlock:
    if field_.dim == 1:
        return eval_block_1d(field_, element, coords[0], deriv[0])
    return eval_block_2d(field_, element, coords[0], coords[1], deriv)


def _pde_rows(problem: ProblemSpec, field_, colloc: CollocationSet) -> List:
    blocks = []
    n = field_.free_count
    for element in colloc.elements():
        coords = colloc.element_points(element)
        npts = coords[0].size
        coefficients = problem.coefficients(coords)

        matrix = np.zeros((npts, n))
        offset = -problem.source_values(coords)
        for d, c in coefficients.items():
            block = _element_block(field_, element, coords, d)
            matrix += c[:, None] * block.matrix
            offset += c * block.offset
        combined = AffineBlock(matrix, offset)

        name = f"pde:{element}"
        if problem.linear:
            blocks.append(LinearRows(name, combined))
        else:
            values = _element_block(field_, element, coords, (0,) * field_.dim)
            blocks.append(NonlinearPdeRows(name, combined, values, problem.nonlinear, problem.nonlinear_derivative))
    return blocks


def _continuity_rows(problem: ProblemSpec, field_, colloc: CollocationSet, sigma0: float, sigma1: float) -> List:
    blocks = []
    have = field_.continuity
    need = problem.required_continuity
    weights = (sigma0, sigma1)

    for edge in colloc.shared_edges():
        axis = 1 if edge.orientation == 'horizontal' else 0
        coords = (edge.x,) if field_.dim == 1 else (edge.x, edge.y)
        for k in range(have[axis] + 1, need[axis] + 1):
            deriv = tuple(k if a == axis else 0 for a in range(field_.dim))
            jump = _element_block(field_, edge.first, coords, deriv) - _element_block(field_, edge.second, coords, deriv)
            blocks.append(LinearRows(f"continuity:{edge.first}|{edge.second}:d{k}", jump.scaled(weights[k])))
    return blocks


def _boundary_rows(field_, colloc: CollocationSet, sigma: float) -> List:
    blocks = []
    for c in field_.ls_conditions:
        points = None if field_.dim == 1 else colloc.side_points(c.side)
        block = condition_block(field_, c, points)
        blocks.append(LinearRows(f"boundary:{c.side}:{c.kind}", block.scaled(sigma)))
    return blocks


def _relative_rows(field_, colloc: CollocationSet) -> List:
    blocks = []
    for k, c in enumerate(field_.ls_relative):
        points = colloc.line_points(1) if isinstance(c, RelativeEdgeConstraint) else None
        target, sources, offset = relative_blocks(field_, c, points)
        name = f"relative:{k}"
        if isinstance(c, RelativeEdgeConstraint) or c.linear_form:
            coefficients = (1.0,) if isinstance(c, RelativeEdgeConstraint) else c.coefficients
            matrix = target.matrix.copy()
            shift = target.offset - offset
            for coef, s in zip(coefficients, sources):
                matrix -= coef * s.matrix
                shift -= coef * s.offset
            blocks.append(LinearRows(name, AffineBlock(matrix, shift)))
        else:
            blocks.append(NonlinearRelativeRows(name, target, sources, c.function, c.gradient, offset))
    return blocks


def assemble(problem: ProblemSpec, field_, reparam: Optional[Reparameterization] = None,
             colloc: Optional[CollocationSet] = None, scaling: Optional[ScalingSpec] = None) -> ResidualSystem:
    """
    Assemble the least-squares collocation residual

    Args:
        problem: Operator, nonlinear term and source
        field_: Field with boundary conditions applied
        reparam: Reparameterization from build_reparameterization; identity when omitted
        colloc: Collocation points for the field's mesh
        scaling: Row weights for boundary and continuity rows; unit when omitted

    Returns:
        ResidualSystem with PDE rows, continuity rows the field does not carry
        intrinsically, and least-squares boundary and relative rows
    """
    if colloc is None:
        raise ConfigurationError("assemble needs a collocation set")
    if reparam is None:
        reparam = build_reparameterization(field_)
    field_ = reparam.field
    _check_pairing(problem, field_)

    sigma, sigma0, sigma1 = (scaling or ScalingSpec()).resolve(field_.h)
    blocks = _pde_rows(problem, field_, colloc)
    blocks += _continuity_rows(problem, field_, colloc, sigma0, sigma1)
    blocks += _boundary_rows(field_, colloc, sigma)
    blocks += _relative_rows(field_, colloc)

    system = ResidualSystem(field_, reparam, blocks, problem)
    logger.debug(f"Assembled {system}: {system.row_counts()}, σ=({sigma:.3g}, {sigma0:.3g}, {sigma1:.3g})")
    return system
