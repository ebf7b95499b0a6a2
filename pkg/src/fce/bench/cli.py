"""
FCE Benchmark CLI
Run single cases, refinement sweeps, or list the catalog
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from ..config import CLI_FILE_KEYS, RunConfig, load_config_file, run_config_from_mapping
from ..exceptions import FceError
from ..utils.logging import setup_logging
from .cases import get_case, list_cases
from .report import summarize, write_csv
from .runner import FCE_NAMES, RunRecord, resolve_settings, run_case, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED_RUN = 2

EPILOG = """
Examples:
  # Solve the 1D Helmholtz case with its defaults
  fce run helmholtz1d

  # 2D Helmholtz with FCE-C0 on a 2x1 mesh, order 11, results to CSV
  fce run helmholtz2d --fce c0 --elements 2x1 --order 11 --out h2d.csv

  # h-refinement at p=3 with the fitted rate
  fce sweep helmholtz1d --axis h --values 2,4,8,16,32 --order 3

  # Relative BC enforced in the least-squares sense
  fce run relbc2d --relative-mode approx --order 9

  # Settings from a key=value file; flags still win
  fce sweep ivp1d --config ivp.cfg --axis q
"""


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument('case_id', help='Registered case identifier (see "fce list")')
    parser.add_argument('--elements', help='Element counts: N in 1D, N or NxM in 2D')
    parser.add_argument('--order', type=int, help='Basis order p')
    parser.add_argument('--edge-order', type=int, help='Edge basis order m (2D, defaults to p)')
    parser.add_argument('--colloc', choices=['gll', 'uniform'], help='Collocation point kind')
    parser.add_argument('--points', type=int, help='Collocation points per direction q')
    parser.add_argument('--fce', choices=sorted(FCE_NAMES), help='Field kind')
    parser.add_argument('--scaling', help="Row scaling: auto, none or 's,s0,s1' (numbers or h^k)")
    parser.add_argument('--relative-mode', choices=['exact', 'approx', 'auto'],
                        help='Enforcement of relative boundary conditions (default: auto)')
    parser.add_argument('--basis', choices=['legendre', 'sinusoid'], help='Free-function basis family')
    parser.add_argument('--out', help='CSV output file')
    parser.add_argument('--config', help='Plain key=value file with flag defaults')
    parser.add_argument('--log-level', help='Logging level (default: FCE_LOG_LEVEL or WARNING)')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='fce',
        description='Least-squares collocation with functionally connected elements: benchmark runner',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    run = sub.add_parser('run', help='Solve one case', formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_run_flags(run)

    sw = sub.add_parser('sweep', help='Refinement sweep over h, p or q')
    _add_run_flags(sw)
    sw.add_argument('--axis', choices=['h', 'p', 'q'], help='Sweep axis')
    sw.add_argument('--values', help='Comma-separated sweep values')
    sw.add_argument('--metric', choices=['linf', 'l2'], help='Error used for the rate fit')
    sw.add_argument('--jobs', type=int, help='Parallel workers (default: 1)')

    sub.add_parser('list', help='List registered cases')
    return parser


def _merge_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Fill flags left unset from the config file"""
    if not getattr(args, 'config', None):
        return args
    for key, value in load_config_file(args.config).items():
        if key not in vars(args) and key not in CLI_FILE_KEYS:
            continue
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _run_config(args: argparse.Namespace) -> RunConfig:
    keys = ('elements', 'order', 'edge_order', 'colloc', 'points', 'fce', 'scaling', 'relative_mode', 'basis')
    values: Dict[str, Any] = {k: getattr(args, k, None) for k in keys}
    return run_config_from_mapping({k: v for k, v in values.items() if v is not None})


def _print_record(r: RunRecord):
    print(f"{r.case} [{r.fce_kind}] elements=({r.Nx},{r.Ny}) p={r.p} q={r.q} {r.colloc}")
    print(f"  linf={r.linf:.6e}  l2={r.l2:.6e}  residual={r.residual:.3e}  cond~{r.cond_est:.3e}  "
          f"wall={r.wall_ms:.1f}ms")
    if r.rows:
        print(f"  rows: {r.rows}")


def _cmd_list() -> int:
    for case in list_cases():
        elements = 'x'.join(map(str, case.elements))
        print(f"{case.case_id:<18} {case.dim}D  {case.fce:<8} elements={elements:<5} p={case.order:<3} "
              f"{case.description}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace, overrides: RunConfig) -> int:
    try:
        record = run_case(args.case_id, overrides)
    except FceError as exc:
        logger.error(f"{args.case_id} failed: {exc}")
        print(f"Run failed: {exc}", file=sys.stderr)
        return EXIT_FAILED_RUN
    _print_record(record)
    if args.out:
        write_csv([record], args.out)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, overrides: RunConfig) -> int:
    if not args.axis or not args.values:
        print("sweep needs --axis and --values", file=sys.stderr)
        return EXIT_USAGE
    values: List[str] = [v.strip() for v in str(args.values).split(',') if v.strip()]
    report = sweep(args.case_id, args.axis, values, overrides, metric=args.metric, jobs=int(args.jobs or 1))
    print(summarize(report))
    if args.out:
        write_csv(report.records, args.out)
    return EXIT_FAILED_RUN if report.failures else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code"""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        args = _merge_config_file(args) if args.command != 'list' else args
        setup_logging(getattr(args, 'log_level', None) or os.environ.get('FCE_LOG_LEVEL'))
        if args.command == 'list':
            return _cmd_list()

        overrides = _run_config(args)
        resolve_settings(get_case(args.case_id), overrides)
        if args.command == 'run':
            return _cmd_run(args, overrides)
        return _cmd_sweep(args, overrides)
    except (FceError, ValueError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
