"""
Reference Basis Module
Legendre and quasi-random sinusoid basis families, Gauss-Lobatto-Legendre rules and affine maps
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np

from .config import QuadratureConfig
from .exceptions import ConfigurationError, DomainError, NumericError

logger = logging.getLogger(__name__)


__all__ = [
    'LEGENDRE_C0', 'LEGENDRE_C1', 'LEGENDRE_FULL',
    'LEGENDRE_TENSOR_C0', 'LEGENDRE_TENSOR_C1', 'LEGENDRE_TENSOR_FULL',
    'SINUSOID', 'AffineMap', 'BasisSet', 'TensorBasisSet', 'QuadratureRule',
    'legendre_eval', 'legendre_table', 'gll_rule', 'build_basis_set',
]

LEGENDRE_C0 = 'LegendreC0'
LEGENDRE_C1 = 'LegendreC1'
LEGENDRE_FULL = 'LegendreFull'
LEGENDRE_TENSOR_C0 = 'LegendreTensorC0'
LEGENDRE_TENSOR_C1 = 'LegendreTensorC1'
LEGENDRE_TENSOR_FULL = 'LegendreTensorFull'
SINUSOID = 'SinusoidQuasiRandom'

# kind -> (lowest Legendre degree, minimum order p)
_LEGENDRE_KINDS = {
    LEGENDRE_C0: (2, 2),
    LEGENDRE_C1: (4, 4),
    LEGENDRE_FULL: (0, 0),
}
_TENSOR_KINDS = {
    LEGENDRE_TENSOR_C0: LEGENDRE_C0,
    LEGENDRE_TENSOR_C1: LEGENDRE_C1,
    LEGENDRE_TENSOR_FULL: LEGENDRE_FULL,
}

_XI_TOL = 1e-12


@dataclass(frozen=True)
class AffineMap:
    """Map from [a, b] onto the reference interval [-1, 1]"""
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ConfigurationError(f"Interval requires b > a, got a={self.a}, b={self.b}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def jacobian(self) -> float:
        """dξ/dx"""
        return 2.0 / (self.b - self.a)

    def forward(self, x):
        return (2.0 * np.asarray(x, dtype=float) - self.a - self.b) / (self.b - self.a)

    def inverse(self, xi):
        return self.a + 0.5 * (np.asarray(xi, dtype=float) + 1.0) * (self.b - self.a)

    def check(self, x) -> np.ndarray:
        """Reference coordinates of x, raising DomainError when x leaves [a, b]"""
        xi = np.atleast_1d(self.forward(x))
        if xi.size and np.max(np.abs(xi)) > 1.0 + _XI_TOL:
            raise DomainError(f"Point outside [{self.a}, {self.b}]: {self.inverse(xi[np.argmax(np.abs(xi))])}")
        return np.clip(xi, -1.0, 1.0)


def legendre_table(nmax: int, xi, max_deriv: int = 2) -> np.ndarray:
    """
    Legendre polynomials P_0..P_nmax and derivatives by recurrence

    Args:
        nmax: Highest degree
        xi: Reference points in [-1, 1]
        max_deriv: Highest derivative order (0..2)

    Returns:
        Array of shape (max_deriv + 1, nmax + 1, len(xi))
    """
    if nmax < 0:
        raise ConfigurationError(f"Legendre degree must be non-negative, got {nmax}")
    if max_deriv not in (0, 1, 2):
        raise ConfigurationError(f"Derivative order must be 0, 1 or 2, got {max_deriv}")

    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size and np.max(np.abs(xi)) > 1.0 + _XI_TOL:
        raise DomainError(f"Reference coordinate outside [-1, 1]: {xi[np.argmax(np.abs(xi))]}")

    table = np.zeros((3, nmax + 1, xi.size))
    P, dP, d2P = table
    P[0] = 1.0
    if nmax >= 1:
        P[1] = xi
        dP[1] = 1.0
    for n in range(2, nmax + 1):
        P[n] = ((2 * n - 1) * xi * P[n - 1] - (n - 1) * P[n - 2]) / n
        dP[n] = ((2 * n - 1) * (P[n - 1] + xi * dP[n - 1]) - (n - 1) * dP[n - 2]) / n
        d2P[n] = ((2 * n - 1) * (2.0 * dP[n - 1] + xi * d2P[n - 1]) - (n - 1) * d2P[n - 2]) / n

    return table[:max_deriv + 1]


def legendre_eval(n: int, xi: float, max_deriv: int = 2) -> Tuple[float, ...]:
    """Return (P_n(ξ), P_n'(ξ), P_n''(ξ)) truncated to max_deriv"""
    table = legendre_table(n, [xi], max_deriv)
    return tuple(float(table[d, n, 0]) for d in range(max_deriv + 1))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Lobatto-Legendre nodes and weights on [-1, 1]"""
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes on [a, b] and weights scaled by the interval Jacobian"""
        amap = AffineMap(a, b)
        return amap.inverse(self.nodes), self.weights * (0.5 * amap.length)


@lru_cache(maxsize=128)
def _gll_cached(q: int, max_iter: int, tol: float) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    n = q - 1
    if q == 2:
        return (-1.0, 1.0), (1.0, 1.0)

    # Chebyshev-Gauss-Lobatto initial guesses for the roots of P'_n
    x = -np.cos(np.pi * np.arange(1, n) / n)
    for _ in range(max_iter):
        table = legendre_table(n, x, 2)
        dx = table[1, n] / table[2, n]
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    else:
        raise NumericError(f"GLL Newton iteration did not converge for q={q} after {max_iter} iterations")

    x = 0.5 * (x - x[::-1])
    nodes = np.concatenate(([-1.0], x, [1.0]))
    Pn = legendre_table(n, nodes, 0)[0, n]
    weights = 2.0 / (q * n * Pn ** 2)
    return tuple(nodes), tuple(weights)


def gll_rule(q: int, config: QuadratureConfig = QuadratureConfig()) -> QuadratureRule:
    """
    Gauss-Lobatto-Legendre rule with q nodes

    Args:
        q: Node count (2..max_nodes)
        config: Newton iteration settings

    Returns:
        QuadratureRule exact for polynomials up to degree 2q - 3
    """
    if q < 2:
        raise ConfigurationError(f"GLL rule needs at least 2 nodes, got {q}")
    if q > config.max_nodes:
        raise ConfigurationError(f"GLL rules are limited to {config.max_nodes} nodes, got {q}")

    nodes, weights = _gll_cached(q, config.gll_max_iter, config.gll_tol)
    return QuadratureRule(np.array(nodes), np.array(weights))


def _sinusoid_params(count: int) -> Tuple[np.ndarray, np.ndarray]:
    i = np.arange(count, dtype=float)
    return 2.0 * np.sqrt(i + 1.0), np.sin(i + 1.0) + 0.1


@dataclass(frozen=True)
class BasisSet:
    """
    Ordered univariate basis family on an interval

    Legendre kinds hold P_n composed with the affine map for the degrees of
    the kind; the sinusoid kind holds sin(ξ_i φ1(x) + η_i), i = 0..p-1.
    """
    kind: str
    order: int
    domain: AffineMap

    def __post_init__(self):
        if self.kind in _LEGENDRE_KINDS:
            _, p_min = _LEGENDRE_KINDS[self.kind]
        elif self.kind == SINUSOID:
            p_min = 1
        else:
            raise ConfigurationError(f"Unknown 1D basis kind: {self.kind}")
        if self.order < p_min:
            raise ConfigurationError(f"{self.kind} needs order p >= {p_min}, got {self.order}")

    @property
    def count(self) -> int:
        if self.kind == SINUSOID:
            return self.order
        low, _ = _LEGENDRE_KINDS[self.kind]
        return self.order - low + 1

    @property
    def degrees(self) -> np.ndarray:
        if self.kind == SINUSOID:
            raise ConfigurationError("Sinusoid members have no polynomial degree")
        low, _ = _LEGENDRE_KINDS[self.kind]
        return np.arange(low, self.order + 1)

    def eval(self, x, deriv: int = 0) -> np.ndarray:
        """Members (columns) at points x (rows), differentiated deriv times in x"""
        xi = self.domain.check(x)
        if self.kind == SINUSOID:
            freq, phase = _sinusoid_params(self.order)
            phi1 = 0.5 * (xi + 1.0)
            arg = np.outer(phi1, freq) + phase
            scale = (freq / self.domain.length) ** deriv
            if deriv == 0:
                return np.sin(arg)
            if deriv == 1:
                return scale * np.cos(arg)
            if deriv == 2:
                return -scale * np.sin(arg)
            raise ConfigurationError(f"Derivative order must be 0, 1 or 2, got {deriv}")

        table = legendre_table(self.order, xi, deriv)
        return (table[deriv, self.degrees] * self.domain.jacobian ** deriv).T


@dataclass(frozen=True)
class TensorBasisSet:
    """Products of two univariate sets; member index ix * ny + iy"""
    x_set: BasisSet
    y_set: BasisSet
    kind: str = 'Tensor'

    @property
    def count(self) -> int:
        return self.x_set.count * self.y_set.count

    @property
    def order(self) -> int:
        return max(self.x_set.order, self.y_set.order)

    def eval(self, x, y, kx: int = 0, ky: int = 0) -> np.ndarray:
        bx = self.x_set.eval(x, kx)
        by = self.y_set.eval(y, ky)
        if bx.shape[0] != by.shape[0]:
            raise DomainError(f"x and y point counts differ: {bx.shape[0]} vs {by.shape[0]}")
        return np.einsum('na,nb->nab', bx, by).reshape(bx.shape[0], -1)


Domain = Union[AffineMap, Tuple[float, float], Sequence]


def _as_map(domain) -> AffineMap:
    if isinstance(domain, AffineMap):
        return domain
    a, b = domain
    return AffineMap(float(a), float(b))


def build_basis_set(kind: str, p: int, domain: Domain):
    """
    Build a basis family

    Args:
        kind: One of the Legendre kinds, their tensor variants, or the sinusoid kind
        p: Highest polynomial degree, or the sinusoid count
        domain: Interval (AffineMap or (a, b)); a pair of intervals for tensor kinds

    Returns:
        BasisSet or TensorBasisSet
    """
    if kind in _TENSOR_KINDS:
        try:
            dx, dy = domain
            x_map, y_map = _as_map(dx), _as_map(dy)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{kind} needs a rectangle given as two intervals") from exc
        base = _TENSOR_KINDS[kind]
        return TensorBasisSet(BasisSet(base, p, x_map), BasisSet(base, p, y_map), kind=kind)

    return BasisSet(kind, p, _as_map(domain))
