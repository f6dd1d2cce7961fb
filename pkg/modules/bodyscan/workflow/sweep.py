"""
Parameter sweeps: one scenario per value of a single configuration key.
"""

import logging
from typing import Dict, List, Tuple, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from .config import DEFAULTS, check_value
from .runner import run_workflow, analyze_scenario
from ..errors import ConfigError
from ..metrics import coverage_curve
from ..planner import greedy_select
from .scenario import build_scenario, reference_model

LOGGER = logging.getLogger(__name__)

# Axes whose sweeps stop after the configuration-space analysis.
ANALYSIS_AXES = ('resolution',)

SUMMARY_COLUMNS = ['n_configs', 't_bp_s', 'coverage_pct', 'mean_distance_mm', 'plan_time_s']

_Job = Tuple[Mapping[str, object], str, object, bool]


def _sweep_row(job: _Job) -> Dict[str, object]:
    config, axis, value, analysis_only = job
    scenario = build_scenario({**config, axis: value})
    LOGGER.info("Sweep %s = %r", axis, value)

    prepared = analyze_scenario(scenario)
    dictionary, _ = prepared
    if analysis_only:
        plan = greedy_select(dictionary, scenario.max_bases, scenario.max_views)
        report = coverage_curve(dictionary, plan, reference_model(scenario), scenario.camera)
    else:
        report = run_workflow(scenario, 'random', prepared).report

    row: Dict[str, object] = {
        axis: value,
        'n_configs': dictionary.n_records,
        't_bp_s': dictionary.analysis_time_per_base,
    }
    row.update(zip(report.stage_labels(), report.per_stage_coverage))
    row.update({
        'coverage_pct': report.coverage_pct,
        'mean_distance_mm': 1000 * report.mean_distance,
        'plan_time_s': report.plan_time,
    })
    return row


def run_sweep(
    config: Mapping[str, object],
    axis: str,
    values: Sequence[object],
    analysis_only: bool = False,
) -> pd.DataFrame:
    """
    Evaluate the configuration once per value of `axis`, all else (seeds
    included) held fixed.

    Sweeps over the planning resolution, and any sweep with
    `analysis_only`, build the dictionary and plan only, reporting the
    coverage expected on the reference; other sweeps simulate a full scan
    per value. Rows follow the order of `values`.
    """
    if axis not in DEFAULTS or axis == 'version':
        raise ConfigError("Cannot sweep over {!r}: not a configuration key".format(axis))
    checked = [check_value(axis, x) for x in values]
    analysis_only = analysis_only or axis in ANALYSIS_AXES

    workers = build_scenario(config).analysis.workers
    if workers > 1 and len(checked) > 1:
        # Values run in parallel, each analysing its bases serially.
        serial = {**config, 'analysis.workers': 1}
        jobs: List[_Job] = [(serial, axis, x, analysis_only) for x in checked]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row((config, axis, x, analysis_only)) for x in checked]

    if not rows:
        return pd.DataFrame(columns=[axis] + SUMMARY_COLUMNS)

    table = pd.DataFrame(rows)
    # Stage columns sit between the analysis summary and the scan results.
    stages = [x for x in table.columns if x not in SUMMARY_COLUMNS and x != axis]
    return table[[axis, 'n_configs', 't_bp_s'] + stages + SUMMARY_COLUMNS[2:]]
