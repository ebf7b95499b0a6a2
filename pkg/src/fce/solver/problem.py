"""
Problem Definition
Linear differential operator with variable coefficients, an optional pointwise nonlinear term and a source
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)


__all__ = ['ProblemSpec']

# constant, or f(*coords) -> values at the points
Coefficient = Union[float, Callable[..., np.ndarray]]


def _evaluate(value, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
    n = coords[0].size
    if callable(value):
        return np.broadcast_to(np.asarray(value(*coords), dtype=float), (n,)).copy()
    return np.full(n, float(value))


@dataclass(frozen=True)
class ProblemSpec:
    """
    L u + N(u) = S

    L u = Σ_d c_d(x) ∂^d u over derivative multi-indices d ((k,) in 1D,
    (kx, ky) in 2D). N is applied pointwise to u and needs its derivative.
    """
    dim: int
    terms: Mapping[Tuple[int, ...], Coefficient]
    source: Coefficient
    nonlinear: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nonlinear_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ''

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"Problems are 1D or 2D, got dim={self.dim}")
        if not self.terms:
            raise ConfigurationError("Problem needs at least one operator term")
        for d in self.terms:
            if len(d) != self.dim or any(k < 0 or k > 2 for k in d):
                raise ConfigurationError(f"Invalid derivative index {d} for a {self.dim}D problem")
        if (self.nonlinear is None) != (self.nonlinear_derivative is None):
            raise ConfigurationError("A nonlinear term needs its derivative, and the other way round")

    @classmethod
    def one_d(cls, source: Coefficient, c_xx: Coefficient = 0.0, c_x: Coefficient = 0.0,
              c0: Coefficient = 0.0, **kwargs) -> 'ProblemSpec':
        """c_xx u'' + c_x u' + c0 u (+ N(u)) = S"""
        terms = {d: c for d, c in (((2,), c_xx), ((1,), c_x), ((0,), c0)) if callable(c) or c != 0.0}
        return cls(1, terms, source, **kwargs)

    @classmethod
    def two_d(cls, source: Coefficient, c_xx: Coefficient = 0.0, c_yy: Coefficient = 0.0,
              c_x: Coefficient = 0.0, c_y: Coefficient = 0.0, c0: Coefficient = 0.0, **kwargs) -> 'ProblemSpec':
        """c_xx u_xx + c_yy u_yy + c_x u_x + c_y u_y + c0 u (+ N(u)) = S"""
        pairs = (((2, 0), c_xx), ((0, 2), c_yy), ((1, 0), c_x), ((0, 1), c_y), ((0, 0), c0))
        terms = {d: c for d, c in pairs if callable(c) or c != 0.0}
        return cls(2, terms, source, **kwargs)

    @property
    def linear(self) -> bool:
        return self.nonlinear is None

    @property
    def order(self) -> Tuple[int, ...]:
        """Highest derivative order per direction"""
        return tuple(max(d[axis] for d in self.terms) for axis in range(self.dim))

    @property
    def required_continuity(self) -> Tuple[int, ...]:
        """C^(k-1) per direction for an operator of order k there"""
        return tuple(max(k - 1, 0) for k in self.order)

    def coefficients(self, coords: Tuple[np.ndarray, ...]) -> Dict[Tuple[int, ...], np.ndarray]:
        return {d: _evaluate(c, coords) for d, c in self.terms.items()}

    def source_values(self, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
        return _evaluate(self.source, coords)
