"""
Collocation Points
Per-element Gauss-Lobatto-Legendre or uniform collocation nodes with shared-edge and outer-side subsets
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from ..basis import AffineMap, gll_rule
from ..exceptions import ConfigurationError
from ..fce1d import Partition1D
from ..fce2d import Mesh2D

logger = logging.getLogger(__name__)


__all__ = ['GLL', 'UNIFORM', 'CollocationSet', 'SharedEdge', 'make_collocation', 'reference_nodes']

GLL = 'gll'
UNIFORM = 'uniform'

Mesh = Union[Partition1D, Mesh2D]


def reference_nodes(kind: str, q: int) -> np.ndarray:
    """q nodes on [-1, 1], both kinds including the endpoints"""
    if q < 2:
        raise ConfigurationError(f"Collocation needs at least 2 points per direction, got {q}")
    if kind == GLL:
        return gll_rule(q).nodes
    if kind == UNIFORM:
        return np.linspace(-1.0, 1.0, q)
    raise ConfigurationError(f"Unknown collocation kind: {kind}")


@dataclass(frozen=True)
class SharedEdge:
    """Points on an interface together with the two elements that meet there"""
    orientation: str
    first: Union[int, Tuple[int, int]]
    second: Union[int, Tuple[int, int]]
    x: np.ndarray
    y: Optional[np.ndarray] = None


@dataclass(frozen=True)
class CollocationSet:
    """
    Collocation nodes for every element of a 1D partition or 2D tensor mesh

    Element nodes are q per direction (a q x q tensor grid in 2D). Because
    both node kinds include the element endpoints, the points that two
    neighbouring elements place on their shared edge coincide.
    """
    kind: str
    q: int
    mesh: Mesh

    @property
    def dim(self) -> int:
        return 1 if isinstance(self.mesh, Partition1D) else 2

    @property
    def axes(self) -> Tuple[Partition1D, ...]:
        return (self.mesh,) if self.dim == 1 else (self.mesh.x, self.mesh.y)

    @property
    def nodes(self) -> np.ndarray:
        return reference_nodes(self.kind, self.q)

    def segment_points(self, axis: int, index: int) -> np.ndarray:
        """Nodes mapped onto segment index of an axis"""
        a, b = self.axes[axis].interval(index)
        return AffineMap(a, b).inverse(self.nodes)

    def elements(self) -> Iterator:
        if self.dim == 1:
            yield from range(self.mesh.N)
        else:
            for i in range(self.mesh.Nx):
                for j in range(self.mesh.Ny):
                    yield (i, j)

    def element_points(self, element) -> Tuple[np.ndarray, ...]:
        """(x,) in 1D; flattened tensor grid (x, y) in 2D, x-major"""
        if self.dim == 1:
            return (self.segment_points(0, element),)
        i, j = element
        X, Y = np.meshgrid(self.segment_points(0, i), self.segment_points(1, j), indexing='ij')
        return X.ravel(), Y.ravel()

    @property
    def size(self) -> int:
        n = self.mesh.N if self.dim == 1 else self.mesh.Nx * self.mesh.Ny
        return n * self.q ** self.dim

    def shared_edges(self) -> List[SharedEdge]:
        """Interface point sets: breakpoints in 1D, per-segment edge nodes in 2D"""
        if self.dim == 1:
            X = self.mesh.breakpoints
            return [SharedEdge('point', i - 1, i, np.array([X[i]])) for i in range(1, self.mesh.N)]

        edges = []
        mesh = self.mesh
        for I in range(1, mesh.Nx):
            for j in range(mesh.Ny):
                y = self.segment_points(1, j)
                edges.append(SharedEdge('vertical', (I - 1, j), (I, j), np.full_like(y, mesh.X[I]), y))
        for J in range(1, mesh.Ny):
            for i in range(mesh.Nx):
                x = self.segment_points(0, i)
                edges.append(SharedEdge('horizontal', (i, J - 1), (i, J), x, np.full_like(x, mesh.Y[J])))
        return edges

    def line_points(self, axis: int) -> np.ndarray:
        """Union of the per-segment nodes along one axis, shared endpoints kept once"""
        points = np.sort(np.concatenate([self.segment_points(axis, k) for k in range(self.axes[axis].N)]))
        axis_ = self.axes[axis]
        keep = np.concatenate(([True], np.diff(points) > 1e-12 * (axis_.b - axis_.a)))
        return points[keep]

    def side_points(self, side: str) -> np.ndarray:
        """Tangential coordinates of the nodes on an outer side of a 2D mesh"""
        if side in ('left', 'right'):
            return self.line_points(1)
        if side in ('bottom', 'top'):
            return self.line_points(0)
        raise ConfigurationError(f"Unknown side: {side}")


def make_collocation(mesh: Mesh, kind: str = GLL, q: int = 4) -> CollocationSet:
    """
    Collocation nodes for a mesh

    Args:
        mesh: Partition1D or Mesh2D
        kind: 'gll' or 'uniform'
        q: Points per element per direction (q >= 2)

    Returns:
        CollocationSet
    """
    reference_nodes(kind, q)
    colloc = CollocationSet(kind, int(q), mesh)
    logger.debug(f"Collocation: {kind}, q={q}, {colloc.size} points")
    return colloc
