"""
Run Reports
CSV serialisation of run records and plain-text sweep summaries
"""

import csv
import io
import logging
import math
from pathlib import Path
from typing import Iterable, List, TextIO, Union

from ..exceptions import ConfigurationError
from .runner import CSV_FIELDS, ConvergenceReport, RunRecord

logger = logging.getLogger(__name__)


__all__ = ['format_value', 'records_to_csv', 'records_from_csv', 'write_csv', 'read_csv', 'summarize']

_INT_FIELDS = {'Nx', 'Ny', 'p', 'm', 'q'}
_STR_FIELDS = {'case', 'fce_kind', 'colloc'}


def format_value(value) -> str:
    """Integers as-is, floats with 15 significant digits, nan/inf spelled out"""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return f"{value:.15g}"


def _write(records: Iterable[RunRecord], stream: TextIO):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([format_value(getattr(r, name)) for name in CSV_FIELDS])


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buffer = io.StringIO()
    _write(records, buffer)
    return buffer.getvalue()


def records_from_csv(text: str) -> List[RunRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_FIELDS:
        raise ConfigurationError(f"Unexpected CSV header: {header}")
    records = []
    for line, row in enumerate(reader, start=2):
        if len(row) != len(CSV_FIELDS):
            raise ConfigurationError(f"CSV line {line} has {len(row)} fields, expected {len(CSV_FIELDS)}")
        values = {}
        for name, raw in zip(CSV_FIELDS, row):
            if name in _STR_FIELDS:
                values[name] = raw
            elif name in _INT_FIELDS:
                values[name] = int(raw)
            else:
                values[name] = float(raw)
        records.append(RunRecord(**values))
    return records


def write_csv(records: Iterable[RunRecord], path: Union[str, Path]) -> Path:
    """Write records to path with LF line endings"""
    path = Path(path)
    records = list(records)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        _write(records, fh)
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def read_csv(path: Union[str, Path]) -> List[RunRecord]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"CSV file not found: {path}")
    with open(path, 'r', encoding='utf-8', newline='') as fh:
        return records_from_csv(fh.read())


def summarize(report: ConvergenceReport) -> str:
    """Human-readable sweep table"""
    lines = [f"{report.case}: {report.axis}-sweep ({report.metric})"]
    lines.append(f"{'value':>8} {'linf':>12} {'l2':>12} {'residual':>12} {'wall_ms':>10}")
    for value, r in zip(report.values, report.records):
        if r.failed:
            lines.append(f"{value:>8} failed: {r.error}")
            continue
        lines.append(f"{value:>8} {r.linf:12.3e} {r.l2:12.3e} {r.residual:12.3e} {r.wall_ms:10.1f}")
    if report.rate is not None:
        lines.append(f"fitted rate: {report.rate:.3f}")
    return '\n'.join(lines)
