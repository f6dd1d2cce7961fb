"""
Command line surface of the scanner.

Each subcommand writes its results into a run directory (``--out``, by
default a fresh directory under ``SCAN_OUTPUT_ROOT``) together with the
effective configuration and a copy of the console log, and prints a summary
in the chosen ``--format``. Any failure exits with status 1 after a one-line
diagnostic.
"""

import sys
import logging
import argparse
import contextlib
from typing import Dict, Tuple, Union, Iterator, Optional, Sequence
from pathlib import Path

import pandas as pd
import scan_utils

from .sweep import run_sweep
from ..robot import BasePose
from .config import Config, dump_config, load_config, parse_value
from .runner import (
    plan_scan,
    write_run,
    write_plan,
    run_workflow,
    write_report,
    expected_report,
    run_monte_carlo,
    analyze_scenario,
)
from ..metrics import (
    report_table,
    evaluate_scan,
    CoverageReport,
    read_report_csv,
    plot_coverage_svg,
    format_report_text,
)
from .scenario import build_scenario
from ..geometry import read_ply

LOGGER = logging.getLogger(__name__)

FORMATS = ('text', 'csv', 'svg')
WORKSPACES = ('full', 'narrow', 'one-side')

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


@contextlib.contextmanager
def propagate_exit_code() -> Iterator[None]:
    """
    Exit at the end of a block, with an exit code indicating whether or not
    an error happened.

    Errors are reported as a single line on stderr rather than a traceback;
    the traceback is still logged at debug level.
    """
    try:
        yield
    except Exception as e:
        LOGGER.debug("Command failed", exc_info=True)
        print("error: {}: {}".format(type(e).__name__, e), file=sys.stderr)  # noqa:T001
        raise SystemExit(1)
    raise SystemExit(0)


@contextlib.contextmanager
def log_to_stderr(verbose: bool) -> Iterator[None]:
    """Send log records to the current stderr for the duration of the block."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    level = root.level
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
    try:
        yield
    finally:
        root.removeHandler(handler)
        root.setLevel(level)


def _start_pose(text: str) -> Union[BasePose, str]:
    if text == 'random':
        return text
    try:
        x, y, heading = (float(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected 'x,y,heading' or 'random', got {!r}".format(text),
        ) from None
    return BasePose(x, y, heading)


def _setting(text: str) -> Tuple[str, str]:
    key, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE, got {!r}".format(text))
    return key.strip(), value.strip()


def overrides_from(args: argparse.Namespace) -> Dict[str, object]:
    """Configuration entries set by command line flags."""
    overrides: Dict[str, object] = {}
    for key, value in args.settings:
        overrides[key] = parse_value(key, value)
    if args.seed is not None:
        overrides['seeds.sampling'] = args.seed
        overrides['seeds.jitter'] = args.seed + 1
        overrides['seeds.noise'] = args.seed + 2
    if args.workspace is not None:
        overrides['workspace.kind'] = args.workspace.replace('-', '_')
    flags = (
        ('couch.height', args.couch_height),
        ('budgets.max_bases', args.bases),
        ('budgets.max_views', args.views),
        ('resolution', args.resolution),
        ('analysis.workers', args.workers),
    )
    overrides.update((key, value) for key, value in flags if value is not None)
    return overrides


def emit_report(report: CoverageReport, out: Path, output_format: str) -> None:
    if output_format == 'csv':
        text = report_table(report).to_csv(index=False, float_format='%.4f')
        print(text, end='')  # noqa:T001
    elif output_format == 'svg':
        print(out / 'coverage.svg')  # noqa:T001
    else:
        print(format_report_text(report), end='')  # noqa:T001


def emit_table(table: pd.DataFrame, path: Path, output_format: str) -> None:
    table.to_csv(path, index=False, float_format='%.4f')
    if output_format == 'text':
        print(table.to_string(index=False, float_format='{:.2f}'.format))  # noqa:T001
    else:
        print(path.read_text(), end='')  # noqa:T001


def cmd_analyze(args: argparse.Namespace, config: Config, out: Path) -> None:
    scenario = build_scenario(config)
    dictionary, _ = analyze_scenario(scenario, args.dictionary or out / 'dictionary.npz')
    (out / 'effective-config.txt').write_text(dump_config(config))
    print("{} samples, {} bases, {} configurations, {:.2f} s per base".format(  # noqa:T001
        dictionary.n_samples,
        len(dictionary.bases),
        dictionary.n_records,
        dictionary.analysis_time_per_base,
    ))


def cmd_plan(args: argparse.Namespace, config: Config, out: Path) -> None:
    scenario = build_scenario(config)
    prepared = analyze_scenario(scenario, args.dictionary)
    planned = plan_scan(scenario, args.start, prepared)
    report = expected_report(scenario, planned)
    write_plan(out, planned.plan, report, config)
    emit_report(report, out, args.format)


def cmd_simulate(args: argparse.Namespace, config: Config, out: Path) -> None:
    scenario = build_scenario(config)
    prepared = analyze_scenario(scenario, args.dictionary)
    if args.starts is not None:
        table = run_monte_carlo(scenario, args.starts, prepared)
        (out / 'effective-config.txt').write_text(dump_config(config))
        emit_table(table, out / 'montecarlo.csv', args.format)
        return

    result = run_workflow(scenario, args.start, prepared)
    write_run(out, result, config)
    emit_report(result.report, out, args.format)


def cmd_sweep(args: argparse.Namespace, config: Config, out: Path) -> None:
    values = [parse_value(args.axis, x) for x in args.values.split(',') if x.strip()]
    table = run_sweep(config, args.axis, values, args.analysis_only)
    (out / 'effective-config.txt').write_text(dump_config(config))
    emit_table(table, out / 'sweep.csv', args.format)


def cmd_evaluate(args: argparse.Namespace, config: Config, out: Path) -> None:
    voxel = config['stitch.voxel']
    assert isinstance(voxel, float)
    report = evaluate_scan(read_ply(args.scan), read_ply(args.reference), voxel)
    write_report(out, report)
    emit_report(report, out, args.format)


def cmd_report(args: argparse.Namespace, config: Config, out: Path) -> None:
    report = read_report_csv(args.run_directory / 'report.csv')
    if args.format == 'svg':
        plot_coverage_svg(out / 'coverage.svg', report)
    emit_report(report, out, args.format)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help="scenario configuration file")
    common.add_argument(
        '--set',
        dest='settings',
        type=_setting,
        action='append',
        default=[],
        metavar='KEY=VALUE',
        help="override one configuration entry (repeatable)",
    )
    common.add_argument('--seed', type=int, help="derive all three seeds from N")
    common.add_argument('--out', type=Path, help="run directory")
    common.add_argument('--workspace', choices=WORKSPACES)
    common.add_argument('--couch-height', type=float, metavar='M')
    common.add_argument('--bases', type=int, metavar='N', help="maximum base positions")
    common.add_argument('--views', type=int, metavar='N', help="maximum views per base")
    common.add_argument('--resolution', type=float, metavar='M', help="planning resolution")
    common.add_argument('--workers', type=int, metavar='N', help="worker processes")
    common.add_argument(
        '--dictionary',
        type=Path,
        help="configuration dictionary cache to reuse or create",
    )
    common.add_argument('--format', choices=FORMATS, default='text')
    common.add_argument(
        '--dump-config',
        action='store_true',
        help="print the effective configuration and exit",
    )
    common.add_argument('-v', '--verbose', action='store_true')

    parser = argparse.ArgumentParser(
        prog='run-scan',
        description="Plan, simulate and evaluate autonomous body surface scans.",
    )
    commands = parser.add_subparsers(dest='command', required=True)

    analyze = commands.add_parser(
        'analyze',
        parents=[common],
        help="build the configuration dictionary",
    )
    analyze.set_defaults(func=cmd_analyze)

    plan = commands.add_parser(
        'plan',
        parents=[common],
        help="choose the scan's views without simulating it",
    )
    simulate = commands.add_parser(
        'simulate',
        parents=[common],
        help="simulate a complete scan",
    )
    for command, func in ((plan, cmd_plan), (simulate, cmd_simulate)):
        command.add_argument(
            '--start',
            type=_start_pose,
            default='random',
            metavar='X,Y,HEADING',
            help="start base pose (default: drawn from the jitter seed)",
        )
        command.set_defaults(func=func)
    simulate.add_argument(
        '--starts',
        type=int,
        metavar='N',
        help="repeat from N random start poses and tabulate the results",
    )

    sweep = commands.add_parser(
        'sweep',
        parents=[common],
        help="repeat over the values of one configuration key",
    )
    sweep.add_argument('axis', help="configuration key, e.g. couch.height")
    sweep.add_argument('values', help="comma separated values")
    sweep.add_argument(
        '--analysis-only',
        action='store_true',
        help="stop after planning instead of simulating each scan",
    )
    sweep.set_defaults(func=cmd_sweep)

    evaluate = commands.add_parser(
        'evaluate',
        parents=[common],
        help="compare a scan with a reference point cloud",
    )
    evaluate.add_argument('scan', type=Path, help="scanned PLY point cloud")
    evaluate.add_argument('reference', type=Path, help="reference PLY point cloud")
    evaluate.set_defaults(func=cmd_evaluate)

    report = commands.add_parser(
        'report',
        parents=[common],
        help="render the report of an earlier run",
    )
    report.add_argument('run_directory', type=Path)
    report.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> None:
    args = build_parser().parse_args(argv)

    with propagate_exit_code():
        config = load_config(args.config, overrides_from(args))
        if args.dump_config:
            print(dump_config(config), end='')  # noqa:T001
            return

        out: Optional[Path] = args.out
        if out is None:
            out = args.run_directory if args.command == 'report' else (
                scan_utils.get_run_directory(args.command)
            )
        out.mkdir(parents=True, exist_ok=True)

        # A report is rendered into the run it describes, next to that run's log.
        log_name = 'report-log.txt' if args.command == 'report' else 'run-log.txt'
        with scan_utils.tee_streams(out / log_name):
            with log_to_stderr(args.verbose):
                # Nested so that a failure is reported while the log is still
                # being captured; the outer block passes the exit through.
                with propagate_exit_code():
                    args.func(args, config, out)
