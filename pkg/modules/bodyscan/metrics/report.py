"""
Tabular, text and plotted forms of a coverage report.
"""

import math
from typing import Dict, List
from pathlib import Path

import pandas as pd
import matplotlib
from matplotlib.figure import Figure

from .curve import CoverageReport

REPORT_COLUMNS = [
    'stage',
    'coverage_pct',
    'mean_distance_mm',
    'plan_time_s',
    'travel_m',
    'reference_kind',
    'voxel_m',
    'n_reference_points',
]

# Fixed so that repeated runs give byte-identical SVG files.
SVG_HASH_SALT = 'bodyscan'


def report_table(report: CoverageReport) -> pd.DataFrame:
    """
    One row per stage followed by a `scan` row holding the realised coverage,
    surface distance, estimated scan time and travel distance along with
    what the coverage was measured against.
    """
    rows: List[Dict[str, object]] = [
        {
            'stage': label,
            'coverage_pct': value,
            'mean_distance_mm': math.nan,
            'plan_time_s': math.nan,
            'travel_m': math.nan,
        }
        for label, value in zip(report.stage_labels(), report.per_stage_coverage)
    ]
    rows.append({
        'stage': 'scan',
        'coverage_pct': report.coverage_pct,
        'mean_distance_mm': 1000 * report.mean_distance,
        'plan_time_s': report.plan_time,
        'travel_m': report.travel_distance,
        'reference_kind': report.reference_kind,
        'voxel_m': report.voxel,
        'n_reference_points': report.n_reference_points,
    })
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def write_report_csv(path: Path, report: CoverageReport) -> None:
    report_table(report).to_csv(path, index=False, float_format='%.4f')


def read_report_csv(path: Path) -> CoverageReport:
    """Load a report written by `write_report_csv`."""
    table = pd.read_csv(path)
    valid = list(table.columns) == REPORT_COLUMNS and not table.empty
    if not valid or table['stage'].iloc[-1] != 'scan':
        raise ValueError("{} is not a coverage report".format(path))

    stages = table.iloc[:-1]
    scan = table.iloc[-1]
    return CoverageReport(
        coverage_pct=float(scan['coverage_pct']),
        mean_distance=float(scan['mean_distance_mm']) / 1000,
        per_stage_coverage=tuple(float(x) for x in stages['coverage_pct']),
        reference_kind=str(scan['reference_kind']),
        voxel=float(scan['voxel_m']),
        n_reference_points=int(scan['n_reference_points']),
        explorative=bool(len(stages)) and stages['stage'].iloc[0] == 'explorative',
        plan_time=float(scan['plan_time_s']),
        travel_distance=float(scan['travel_m']),
    )


def format_report_text(report: CoverageReport) -> str:
    lines = [
        'reference: {} ({} points, voxel {:.3f} m)'.format(
            report.reference_kind,
            report.n_reference_points,
            report.voxel,
        ),
        'coverage: {:.2f} %'.format(report.coverage_pct),
    ]
    if not math.isnan(report.mean_distance):
        lines.append('mean distance: {:.2f} mm'.format(1000 * report.mean_distance))
    if not math.isnan(report.plan_time):
        lines.append('estimated time: {:.0f} s'.format(report.plan_time))
    if not math.isnan(report.travel_distance):
        lines.append('base travel: {:.2f} m'.format(report.travel_distance))

    if report.per_stage_coverage:
        stages = pd.DataFrame(
            [['{:.2f}'.format(x) for x in report.per_stage_coverage]],
            columns=report.stage_labels(),
            index=['coverage %'],
        )
        lines.append('')
        lines.append(stages.to_string())
    return '\n'.join(lines) + '\n'


def plot_coverage_svg(path: Path, report: CoverageReport) -> None:
    """Line plot of the cumulative coverage by stage."""
    labels = report.stage_labels()

    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    axes.plot(range(len(labels)), report.per_stage_coverage, marker='o', linewidth=2)
    axes.set_xticks(range(len(labels)))
    axes.set_xticklabels(labels)
    axes.set_ylim(0, 100)
    axes.set_xlabel('Stage')
    axes.set_ylabel('Surface coverage (%)')
    axes.grid(alpha=0.3)
    figure.tight_layout()

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
        figure.savefig(path, format='svg', metadata={'Date': None})
