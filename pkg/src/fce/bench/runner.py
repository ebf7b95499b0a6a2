"""
Benchmark Runner
Resolve case settings, build field and system, solve, measure errors; sweeps over h, p or q
"""

import logging
import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..config import ErrorMetricConfig, GaussNewtonConfig, LeastSquaresConfig, RunConfig
from ..constraints import (
    EXACT, LEAST_SQUARES, BoundarySpec, apply_boundary, build_reparameterization, relative_supports_exact,
    supports_exact,
)
from ..exceptions import ConfigurationError, FceError
from ..fce1d import FAMILY_LEGENDRE, FAMILY_SINUSOID, KIND_NC, Partition1D, build_field_1d
from ..fce2d import Mesh2D, build_field_2d
from ..solver.assembly import ScalingSpec, assemble
from ..solver.collocation import GLL, UNIFORM, make_collocation
from ..solver.linalg import solve
from ..utils.logging import log_duration
from .cases import ProblemCase, get_case
from .metrics import constraint_residual, fit_rate, l2_error, linf_error

logger = logging.getLogger(__name__)


__all__ = [
    'RunRecord', 'RunSettings', 'ConvergenceReport', 'CSV_FIELDS', 'FCE_NAMES',
    'parse_elements', 'resolve_settings', 'run_case', 'sweep',
]

# CLI spelling -> field kind
FCE_NAMES = {'c1': 'C1', 'c0': 'C0', 'mixed-x': 'MixedC1x', 'mixed-y': 'MixedC1y', 'nc': 'NC'}

RELATIVE_MODES = {'exact': EXACT, 'approx': LEAST_SQUARES, 'auto': 'auto'}

SWEEP_AXES = ('h', 'p', 'q')


@dataclass
class RunRecord:
    """One solved run; the first fields form the CSV row"""
    case: str
    fce_kind: str
    Nx: int
    Ny: int
    p: int
    m: int
    q: int
    colloc: str
    linf: float = float('nan')
    l2: float = float('nan')
    residual: float = float('nan')
    cond_est: float = float('nan')
    wall_ms: float = float('nan')
    # not serialised
    h: float = field(default=float('nan'), repr=False, compare=False)
    error: str = field(default='', repr=False, compare=False)
    constraint_residual: float = field(default=float('nan'), repr=False, compare=False)
    rows: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)
    diagnostics: Any = field(default=None, repr=False, compare=False)
    theta: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    field_: Any = field(default=None, repr=False, compare=False)

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def metric(self, name: str) -> float:
        if name not in ('linf', 'l2'):
            raise ConfigurationError(f"Unknown error metric '{name}'; expected linf or l2")
        return getattr(self, name)


CSV_FIELDS = tuple(f.name for f in fields(RunRecord))[:13]


@dataclass(frozen=True)
class RunSettings:
    """Fully resolved settings of one run"""
    elements: Tuple[int, ...]
    fce: str
    order: int
    edge_order: int
    colloc: str
    points: int
    family: str
    scaling: ScalingSpec
    relative_mode: str

    @property
    def Nx(self) -> int:
        return self.elements[0]

    @property
    def Ny(self) -> int:
        return self.elements[1] if len(self.elements) > 1 else 0


@dataclass
class ConvergenceReport:
    """Records of a sweep with the fitted algebraic rate for h-sweeps"""
    case: str
    axis: str
    values: List[str]
    records: List[RunRecord]
    metric: str
    rate: Optional[float] = None

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.records)


def parse_elements(text: str, dim: int) -> Tuple[int, ...]:
    """'N' or 'NxM'; a single count in 2D means N per direction"""
    try:
        counts = tuple(int(v) for v in str(text).lower().split('x'))
    except ValueError as exc:
        raise ConfigurationError(f"Cannot parse element counts '{text}'") from exc
    if dim == 2 and len(counts) == 1:
        counts = counts * 2
    if len(counts) != dim or any(n < 1 for n in counts):
        raise ConfigurationError(f"Element counts '{text}' do not fit a {dim}D case")
    return counts


def _resolve_fce(case: ProblemCase, name: Optional[str]) -> str:
    if name is None:
        return case.fce
    kind = FCE_NAMES.get(name.lower())
    if kind is None:
        raise ConfigurationError(f"Unknown FCE kind '{name}'; expected one of {', '.join(FCE_NAMES)}")
    if case.dim == 1 and kind.startswith('Mixed'):
        raise ConfigurationError(f"FCE kind '{name}' only exists in 2D")
    return kind


def _resolve_scaling(case: ProblemCase, text: Optional[str], kind: str, family: str) -> ScalingSpec:
    text = text or 'auto'
    if text == 'none':
        return ScalingSpec()
    if text != 'auto':
        return ScalingSpec.parse(text)
    if case.scaling is not None:
        return ScalingSpec.parse(case.scaling)
    if kind == KIND_NC and family == FAMILY_SINUSOID:
        return ScalingSpec.sinusoid_default(max(case.problem.order))
    return ScalingSpec()


def resolve_settings(case: ProblemCase, overrides: RunConfig = RunConfig()) -> RunSettings:
    """Case defaults with the non-None overrides applied"""
    elements = case.elements if overrides.elements is None else parse_elements(overrides.elements, case.dim)
    kind = _resolve_fce(case, overrides.fce)
    order = case.order if overrides.order is None else int(overrides.order)
    colloc = (overrides.colloc or case.colloc).lower()
    if colloc not in (GLL, UNIFORM):
        raise ConfigurationError(f"Unknown collocation kind '{colloc}'; expected gll or uniform")
    points = case.default_points(order) if overrides.points is None else int(overrides.points)
    family = (overrides.basis or case.family).lower()
    if family not in (FAMILY_LEGENDRE, FAMILY_SINUSOID):
        raise ConfigurationError(f"Unknown basis family '{family}'; expected legendre or sinusoid")
    mode = RELATIVE_MODES.get((overrides.relative_mode or 'auto').lower())
    if mode is None:
        raise ConfigurationError(f"Unknown relative mode '{overrides.relative_mode}'; expected exact, approx or auto")
    edge_order = order if overrides.edge_order is None else int(overrides.edge_order)

    return RunSettings(
        elements=tuple(elements), fce=kind, order=order, edge_order=edge_order, colloc=colloc,
        points=points, family=family, scaling=_resolve_scaling(case, overrides.scaling, kind, family),
        relative_mode=mode,
    )


def _build_field(case: ProblemCase, s: RunSettings):
    if case.dim == 1:
        (a, b), = case.domain
        field_ = build_field_1d(Partition1D.uniform(a, b, s.Nx), s.fce, s.order, family=s.family)
        mesh = field_.partition
    else:
        mesh = Mesh2D.uniform(case.domain, s.Nx, s.Ny)
        field_ = build_field_2d(mesh, s.fce, s.order, s.edge_order, family=s.family)

    spec = BoundarySpec(tuple(
        c if supports_exact(field_, c) else c.with_mode(LEAST_SQUARES) for c in case.boundary_spec().conditions
    ))
    return apply_boundary(field_, spec), mesh


def _relative_constraints(case: ProblemCase, field_, mode: str) -> List:
    resolved = []
    for c in case.relative:
        if mode == 'auto':
            resolved.append(c.with_mode(EXACT if relative_supports_exact(field_, c) else LEAST_SQUARES))
        else:
            resolved.append(c.with_mode(mode))
    return resolved


def run_case(case_id: str, overrides: RunConfig = RunConfig(),
             gn_config: GaussNewtonConfig = GaussNewtonConfig(),
             lsq_config: LeastSquaresConfig = LeastSquaresConfig(),
             metric_config: ErrorMetricConfig = ErrorMetricConfig()) -> RunRecord:
    """
    Solve one benchmark case

    Args:
        case_id: Registered case identifier
        overrides: Settings replacing the case defaults
        gn_config: Gauss-Newton settings for nonlinear systems
        lsq_config: Linear least-squares settings
        metric_config: Error sampling

    Returns:
        RunRecord with errors, residual norm, condition estimate and wall time

    Raises:
        FceError: invalid settings or solver failure
    """
    case = get_case(case_id)
    s = resolve_settings(case, overrides)
    label = f"{case_id} [{s.fce}, elements={'x'.join(map(str, s.elements))}, p={s.order}, q={s.points} {s.colloc}]"

    timing: Dict[str, float] = {}
    with log_duration(logger, label, timing):
        field_, mesh = _build_field(case, s)
        relative = _relative_constraints(case, field_, s.relative_mode)
        reparam = build_reparameterization(field_, relative)
        colloc = make_collocation(mesh, s.colloc, s.points)
        system = assemble(case.problem, reparam.field, reparam, colloc, s.scaling)
        logger.debug(f"{case_id}: system {system.shape}, rows {system.row_counts()}")
        result = solve(system, gn_config=gn_config, lsq_config=lsq_config)

    solved = reparam.field
    Theta = reparam.full(result.theta)
    record = RunRecord(
        case=case_id, fce_kind=s.fce, Nx=s.Nx, Ny=s.Ny, p=s.order, m=s.edge_order if case.dim == 2 else 0,
        q=s.points, colloc=s.colloc,
        linf=linf_error(solved, Theta, case.exact, metric_config),
        l2=l2_error(solved, Theta, case.exact, metric_config),
        residual=result.residual_norm, cond_est=result.cond_est, wall_ms=1000.0 * timing['seconds'],
        h=solved.h, rows=system.row_counts(), diagnostics=result.diagnostics, theta=result.theta, field_=solved,
    )
    if relative:
        record.constraint_residual = max(constraint_residual(solved, Theta, c) for c in relative)
    logger.info(f"{label}: linf={record.linf:.3e}, l2={record.l2:.3e}, residual={record.residual:.3e}")
    return record


def _failed_record(case: ProblemCase, overrides: RunConfig, exc: Exception) -> RunRecord:
    try:
        s = resolve_settings(case, overrides)
        return RunRecord(case.case_id, s.fce, s.Nx, s.Ny, s.order, s.edge_order if case.dim == 2 else 0,
                         s.points, s.colloc, error=str(exc))
    except FceError:
        return RunRecord(case.case_id, overrides.fce or case.fce, 0, 0, 0, 0, 0, overrides.colloc or case.colloc,
                         error=str(exc))


def _run_point(case_id: str, overrides: RunConfig, configs: Tuple) -> RunRecord:
    try:
        record = run_case(case_id, overrides, *configs)
        record.field_ = None
        return record
    except FceError as exc:
        logger.warning(f"{case_id} failed for {overrides}: {exc}")
        return _failed_record(get_case(case_id), overrides, exc)


def _point_override(axis: str, value: str) -> RunConfig:
    if axis == 'h':
        return RunConfig(elements=str(value))
    try:
        number = int(value)
    except ValueError as exc:
        raise ConfigurationError(f"Sweep axis '{axis}' expects integers, got '{value}'") from exc
    return RunConfig(order=number) if axis == 'p' else RunConfig(points=number)


def _check_monotone(axis: str, values: Sequence[str], dim: int):
    if axis == 'h':
        keys = [parse_elements(v, dim)[0] for v in values]
    else:
        keys = [int(v) for v in values]
    steps = np.diff(keys)
    if len(keys) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigurationError(f"Sweep values must be strictly monotone, got {list(values)}")


def sweep(case_id: str, axis: str, values: Sequence, overrides: RunConfig = RunConfig(),
          metric: Optional[str] = None, jobs: int = 1,
          gn_config: GaussNewtonConfig = GaussNewtonConfig(),
          lsq_config: LeastSquaresConfig = LeastSquaresConfig(),
          metric_config: ErrorMetricConfig = ErrorMetricConfig()) -> ConvergenceReport:
    """
    Run a case over a refinement axis

    Args:
        case_id: Registered case identifier
        axis: 'h' (element counts), 'p' (orders) or 'q' (collocation points)
        values: Monotone sweep values
        overrides: Settings shared by every point (the axis value wins)
        metric: Error used for the h-rate fit; the case metric when None
        jobs: Parallel workers for the sweep points

    Returns:
        ConvergenceReport; failed points carry NaN errors and the message
    """
    case = get_case(case_id)
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"Unknown sweep axis '{axis}'; expected one of {', '.join(SWEEP_AXES)}")
    values = [str(v) for v in values]
    if not values:
        raise ConfigurationError("Sweep needs at least one value")
    points = [overrides.merged(_point_override(axis, v)) for v in values]
    _check_monotone(axis, values, case.dim)
    metric = metric or case.metric

    configs = (gn_config, lsq_config, metric_config)
    logger.info(f"Sweep {case_id} over {axis}: {len(points)} points, jobs={jobs}")
    if jobs == 1:
        records = [_run_point(case_id, p, configs) for p in points]
    else:
        records = Parallel(n_jobs=jobs)(delayed(_run_point)(case_id, p, configs) for p in points)

    report = ConvergenceReport(case_id, axis, values, list(records), metric)
    if axis == 'h' and len(records) > 1:
        ok = [r for r in records if not r.failed and math.isfinite(r.h)]
        report.rate = fit_rate([r.h for r in ok], [r.metric(metric) for r in ok])
        if report.rate is not None:
            logger.info(f"Sweep {case_id}: fitted {metric} rate {report.rate:.3f}")
    if report.failures:
        logger.warning(f"Sweep {case_id}: {report.failures} of {len(records)} points failed")
    return report
