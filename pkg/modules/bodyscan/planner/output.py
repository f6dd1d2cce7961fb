"""
Scan-time estimates and the plan's text and tabular exports.
"""

import math
from typing import List

import pandas as pd

from ..robot import RobotParams
from .greedy import ScanPlan
from ..geometry import FloatArray
from .navigation import path_length

VIEW_DWELL = 5.0  # s per captured view
STOP_SETTLE = 10.0  # s per base stop


def travel_distance(plan: ScanPlan) -> float:
    return sum(path_length(x) for x in plan.base_paths)


def estimate_plan_time(
    plan: ScanPlan,
    params: RobotParams,
    view_dwell: float = VIEW_DWELL,
    stop_settle: float = STOP_SETTLE,
) -> float:
    """Seconds to drive every route, settle at every stop and take every view."""
    return (
        travel_distance(plan) / params.base_speed +
        plan.n_views * view_dwell +
        len(plan.stops) * stop_settle
    )


def _numbers(values: FloatArray, places: int) -> str:
    return ' '.join('{:.{}f}'.format(x, places) for x in values)


def format_plan(plan: ScanPlan) -> str:
    """
    The plan as replayable text: a block per stop with the base pose and
    each view's joints, camera position and gain, then every base route.
    """
    lines: List[str] = [
        'stops: {}'.format(len(plan.stops)),
        'views: {}'.format(plan.n_views),
        'expected_coverage: {:.2f}'.format(plan.expected_coverage),
        '',
    ]
    for number, stop in enumerate(plan.stops, start=1):
        lines.append('stop {}: base {} x={:.3f} y={:.3f} heading={:.4f}'.format(
            number,
            stop.base_index,
            stop.base.x,
            stop.base.y,
            stop.base.heading,
        ))
        for record_index, view, gain in zip(stop.record_indices, stop.views, stop.gains):
            lines.append('  view {}: joints {} camera {} gain {}'.format(
                record_index,
                _numbers(view.arm.as_array(), 5),
                _numbers(view.camera.translation, 4),
                gain,
            ))
    for number, waypoints in enumerate(plan.base_paths, start=1):
        lines.append('')
        lines.append('path {}: {:.3f} m'.format(number, path_length(waypoints)))
        lines.extend('  {:.3f} {:.3f}'.format(x, y) for x, y in waypoints)
    return '\n'.join(lines) + '\n'


def gains_table(plan: ScanPlan) -> pd.DataFrame:
    """One row per selected view, in selection order."""
    seen = len(plan.already_seen)
    rows = []
    for number, stop in enumerate(plan.stops, start=1):
        for record_index, gain in zip(stop.record_indices, stop.gains):
            seen += gain
            rows.append({
                'stop': number,
                'base_index': stop.base_index,
                'record': record_index,
                'gain': gain,
                'cumulative_coverage': (
                    100. * seen / plan.n_samples if plan.n_samples else math.nan
                ),
            })
    return pd.DataFrame(
        rows,
        columns=['stop', 'base_index', 'record', 'gain', 'cumulative_coverage'],
    )
