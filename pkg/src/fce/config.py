"""
FCE Configuration Classes
Shared configuration for quadrature, error metrics, least squares, Gauss-Newton and bench runs
"""

import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """Configuration for the Gauss-Lobatto-Legendre node solve"""
    gll_max_iter: int = 100
    gll_tol: float = 1e-14
    max_nodes: int = 64


@dataclass(frozen=True)
class ErrorMetricConfig:
    """Sampling used by the error norms"""
    linf_points: int = 20
    l2_points: int = 12


@dataclass(frozen=True)
class LeastSquaresConfig:
    """Configuration for the linear least-squares solve"""
    # dense pivoted QR below this many rows and columns, lsqr above
    direct_limit: int = 20000
    rank_rtol: float = 1e-13

    lsqr_atol: float = 1e-14
    lsqr_btol: float = 1e-14
    lsqr_iter_lim: int = 200000


@dataclass(frozen=True)
class GaussNewtonConfig:
    """Configuration for the damped Gauss-Newton iteration"""
    max_iter: int = 50
    tol_step: float = 1e-12
    tol_residual: float = 1e-13
    tol_gradient: float = 1e-10
    stagnation_rtol: float = 1e-10

    # Damping
    damping: bool = True
    max_halvings: int = 8
    divergence_patience: int = 5


@dataclass
class RunConfig:
    """Per-run overrides of a benchmark case; None keeps the case default"""
    elements: Optional[str] = None
    order: Optional[int] = None
    edge_order: Optional[int] = None
    colloc: Optional[str] = None
    points: Optional[int] = None
    fce: Optional[str] = None
    scaling: Optional[str] = None
    relative_mode: Optional[str] = None
    basis: Optional[str] = None

    def merged(self, other: 'RunConfig') -> 'RunConfig':
        """Return a copy where the non-None values of other win"""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for f in fields(other):
            value = getattr(other, f.name)
            if value is not None:
                values[f.name] = value
        return RunConfig(**values)


_INT_KEYS = {'order', 'edge_order', 'points'}

# keys accepted in a config file besides the RunConfig fields
CLI_FILE_KEYS = {'axis', 'values', 'out', 'metric', 'jobs', 'log_level'}


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a plain key=value config file

    Keys are CLI flag names; dashes and underscores are interchangeable.

    Args:
        path: Config file location

    Returns:
        Mapping of normalised key to value (ints converted for integer keys)
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")

    raw = dotenv_values(path)
    known = {f.name for f in fields(RunConfig)} | CLI_FILE_KEYS
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        name = key.strip().lstrip('-').replace('-', '_').lower()
        if name not in known:
            raise ConfigurationError(f"Unknown config key '{key}' in {path}")
        if value is None or value == '':
            continue
        if name in _INT_KEYS or name == 'jobs':
            try:
                values[name] = int(value)
            except ValueError as exc:
                raise ConfigurationError(f"Config key '{key}' expects an integer, got '{value}'") from exc
        else:
            values[name] = value.strip()

    logger.info(f"Loaded {len(values)} settings from {path}")
    return values


def run_config_from_mapping(values: Dict[str, Any]) -> RunConfig:
    """Build a RunConfig from the RunConfig keys of a mapping, ignoring the rest"""
    names = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in names})
