"""
Parameter Layout Module
Deterministic index maps over named element parameters and affine functionals over them
"""

import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)


__all__ = ['Key', 'ThetaLayout', 'AffineFunctional', 'AffineBlock', 'BlockAccumulator']

# parameter names are tuples such as ('g', e, k), ('alpha', i) or ('G', role, i, j, k)
Key = Tuple[Hashable, ...]


class ThetaLayout:
    """
    Ordered parameter names split into free entries (indexed 0..size-1) and fixed entries

    The index of a free entry depends only on the ordered key list and the
    set of fixed keys.
    """

    def __init__(self, keys: Iterable[Key], fixed: Optional[Mapping[Key, float]] = None):
        self._keys: Tuple[Key, ...] = tuple(keys)
        fixed = dict(fixed or {})

        known = set(self._keys)
        if len(known) != len(self._keys):
            raise ConfigurationError("Parameter layout contains duplicate keys")
        unknown = [k for k in fixed if k not in known]
        if unknown:
            raise ConfigurationError(f"Fixed entries not in layout: {unknown[:5]}")

        self._fixed = MappingProxyType({k: float(v) for k, v in fixed.items()})
        self._free: Tuple[Key, ...] = tuple(k for k in self._keys if k not in self._fixed)
        self._index: Dict[Key, int] = {k: i for i, k in enumerate(self._free)}

    @property
    def size(self) -> int:
        """Number of free entries"""
        return len(self._free)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, key: Key) -> bool:
        return key in self._index or key in self._fixed

    @property
    def keys(self) -> Tuple[Key, ...]:
        return self._keys

    @property
    def free_keys(self) -> Tuple[Key, ...]:
        return self._free

    @property
    def fixed(self) -> Mapping[Key, float]:
        return self._fixed

    def index(self, key: Key) -> Optional[int]:
        """Position of a free entry, None when fixed or absent"""
        return self._index.get(key)

    def is_fixed(self, key: Key) -> bool:
        return key in self._fixed

    def fixed_value(self, key: Key) -> float:
        return self._fixed[key]

    def count(self, name: Hashable) -> int:
        """Free entries whose key starts with name"""
        return sum(1 for k in self._free if k[0] == name)

    def value(self, theta: np.ndarray, key: Key) -> float:
        """Entry value, free or fixed"""
        if key in self._fixed:
            return self._fixed[key]
        return float(theta[self._index[key]])

    def check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size != self.size:
            raise ShapeError(f"Parameter vector has length {theta.size}, layout expects {self.size}")
        return theta

    def __repr__(self):
        return f"ThetaLayout(free={self.size}, fixed={len(self._fixed)})"


@dataclass(frozen=True)
class AffineFunctional:
    """row · Θ + offset, with the row stored sparsely over free entries"""
    indices: np.ndarray
    values: np.ndarray
    offset: float
    size: int

    @classmethod
    def from_dense(cls, row: np.ndarray, offset: float) -> 'AffineFunctional':
        row = np.asarray(row, dtype=float)
        nz = np.flatnonzero(row)
        return cls(nz, row[nz], float(offset), row.size)

    def evaluate(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.size:
            raise ShapeError(f"Parameter vector has length {theta.size}, functional expects {self.size}")
        return float(self.values @ theta[self.indices] + self.offset)

    def dense(self) -> np.ndarray:
        row = np.zeros(self.size)
        row[self.indices] = self.values
        return row

    def coefficient(self, index: int) -> float:
        hit = np.flatnonzero(self.indices == index)
        return float(self.values[hit[0]]) if hit.size else 0.0

    def support(self, tol: float = 0.0) -> List[int]:
        """Indices with |coefficient| > tol"""
        return [int(i) for i, v in zip(self.indices, self.values) if abs(v) > tol]


@dataclass(frozen=True)
class AffineBlock:
    """Stacked affine functionals: matrix @ Θ + offset"""
    matrix: np.ndarray
    offset: np.ndarray

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.matrix.shape[1]:
            raise ShapeError(f"Parameter vector has length {theta.size}, block expects {self.matrix.shape[1]}")
        return self.matrix @ theta + self.offset

    def functional(self, row: int) -> AffineFunctional:
        return AffineFunctional.from_dense(self.matrix[row], self.offset[row])

    def __sub__(self, other: 'AffineBlock') -> 'AffineBlock':
        return AffineBlock(self.matrix - other.matrix, self.offset - other.offset)

    def scaled(self, weights) -> 'AffineBlock':
        w = np.broadcast_to(np.asarray(weights, dtype=float), self.offset.shape)
        return AffineBlock(self.matrix * w[:, None], self.offset * w)


class BlockAccumulator:
    """Collects (keys, coefficient matrix) chunks for a batch of points and resolves them against a layout"""

    def __init__(self, n_points: int):
        self.n_points = n_points
        self._chunks: List[Tuple[Sequence[Key], np.ndarray]] = []
        self.offset = np.zeros(n_points)

    def add(self, keys: Sequence[Key], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float).reshape(self.n_points, len(keys))
        self._chunks.append((keys, matrix))

    def add_offset(self, values):
        self.offset = self.offset + np.broadcast_to(np.asarray(values, dtype=float), (self.n_points,))

    def to_block(self, layout: ThetaLayout) -> AffineBlock:
        matrix = np.zeros((self.n_points, layout.size))
        offset = self.offset.copy()
        for keys, chunk in self._chunks:
            cols = []
            picked = []
            for j, key in enumerate(keys):
                idx = layout.index(key)
                if idx is not None:
                    cols.append(idx)
                    picked.append(j)
                elif layout.is_fixed(key):
                    offset += chunk[:, j] * layout.fixed_value(key)
                else:
                    raise ConfigurationError(f"Parameter {key} is not part of the layout")
            if cols:
                np.add.at(matrix, (slice(None), np.array(cols)), chunk[:, picked])
        return AffineBlock(matrix, offset)
