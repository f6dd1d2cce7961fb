"""
End-to-end simulated scans: explore, plan, drive, capture, stitch, evaluate.
"""

import math
import logging
from typing import Dict, List, Tuple, Union, Mapping, Optional, Sequence, NamedTuple
from pathlib import Path
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd

from ..robot import BasePose, ArmConfig, base_fits, forward_kinematics
from ..utils import make_rng
from .config import dump_config
from ..bodies import SurfaceModel
from ..cspace import (
    params_hash,
    facing_couch,
    load_dictionary,
    save_dictionary,
    build_dictionary,
    ConfigDictionary,
)
from ..errors import NoCandidates
from ..sensor import ScanFrame, render_scan, write_frame, visible_points
from ..metrics import (
    coverage_curve,
    CoverageReport,
    write_report_csv,
    plot_coverage_svg,
    format_report_text,
)
from ..planner import (
    ScanPlan,
    format_plan,
    gains_table,
    greedy_select,
    travel_distance,
    attach_base_paths,
    estimate_plan_time,
    build_occupancy_grid,
)
from .scenario import make_body, planning_model, ScenarioConfig, reference_model
from ..geometry import Pose, look_rotation
from ..stitching import stitch_full, StitchResult, write_stitch_result

LOGGER = logging.getLogger(__name__)

# Arm folded upright, from where the explorative capture is taken.
SURVEY_ARM = ArmConfig((0., -math.pi / 2, 0., -math.pi / 2, 0., 0.))

# Seed stream for drawing start poses, kept apart from per-frame streams.
START_STREAM = 2 ** 32 - 1
MAX_START_ATTEMPTS = 1000

Prepared = Tuple[ConfigDictionary, SurfaceModel]


class PlannedScan(NamedTuple):
    plan: ScanPlan
    start: BasePose
    explorative: Pose  # camera pose of the explorative capture
    dictionary: ConfigDictionary


class WorkflowResult(NamedTuple):
    stitch: StitchResult
    report: CoverageReport
    plan: ScanPlan
    start: BasePose
    explorative_frame: ScanFrame
    frames_by_stop: Tuple[Tuple[ScanFrame, ...], ...]


def analyze_scenario(scenario: ScenarioConfig, cache: Optional[Path] = None) -> Prepared:
    """
    The planning model and its configuration dictionary. With `cache`, a
    dictionary stored there is reused if it was built from the same inputs
    and a freshly built one is stored otherwise.
    """
    model = planning_model(scenario)
    if cache is not None and cache.exists():
        expected = params_hash(
            model,
            scenario.robot,
            scenario.camera,
            scenario.couch,
            scenario.workspace,
            scenario.analysis,
        )
        LOGGER.info("Reusing configuration dictionary %s", cache)
        return load_dictionary(cache, expected), model

    dictionary = build_dictionary(
        model,
        scenario.robot,
        scenario.camera,
        scenario.couch,
        scenario.workspace,
        scenario.analysis,
    )
    if cache is not None:
        save_dictionary(cache, dictionary)
    return dictionary, model


def random_start(scenario: ScenarioConfig, seed: int) -> BasePose:
    """A base pose drawn uniformly over the free floor, turned towards the couch."""
    rng = make_rng([seed, START_STREAM])
    region = scenario.workspace.free_region
    for _ in range(MAX_START_ATTEMPTS):
        base = facing_couch(
            scenario.couch,
            float(rng.uniform(region.x_min, region.x_max)),
            float(rng.uniform(region.y_min, region.y_max)),
        )
        if base_fits(scenario.robot, base, scenario.couch, scenario.workspace):
            return base
    raise NoCandidates("No start pose fits the {} workspace".format(scenario.workspace.kind))


def explorative_camera(scenario: ScenarioConfig, start: BasePose) -> Pose:
    """The camera raised on the folded arm, aimed at the centre of the couch top."""
    position = forward_kinematics(scenario.robot, start, SURVEY_ARM).translation
    centre = np.array((0., 0., scenario.couch.height))
    return Pose.from_rotation(look_rotation(centre - position), position)


def _timed(scenario: ScenarioConfig, report: CoverageReport, plan: ScanPlan) -> CoverageReport:
    return report._replace(
        plan_time=estimate_plan_time(
            plan,
            scenario.robot,
            scenario.view_dwell,
            scenario.stop_settle,
        ),
        travel_distance=travel_distance(plan),
    )


def plan_scan(
    scenario: ScenarioConfig,
    start: Union[BasePose, str] = 'random',
    prepared: Optional[Prepared] = None,
) -> PlannedScan:
    """
    Choose the views of a scan from `start` ("random" draws one from the
    jitter seed).

    The samples seen by an explorative capture from the start pose count as
    covered before the greedy selection, and the base routes run from the
    start through every stop.
    """
    dictionary, model = analyze_scenario(scenario) if prepared is None else prepared
    if isinstance(start, str):
        if start != 'random':
            raise ValueError("Start must be a base pose or 'random', got {!r}".format(start))
        start = random_start(scenario, scenario.seeds.jitter)
    LOGGER.info("Starting at x=%.2f y=%.2f heading=%.2f", start.x, start.y, start.heading)

    explorative = explorative_camera(scenario, start)
    already_seen = visible_points(scenario.camera, explorative, model)
    plan = greedy_select(dictionary, scenario.max_bases, scenario.max_views, already_seen)
    grid = build_occupancy_grid(
        scenario.couch,
        scenario.workspace,
        scenario.robot,
        scenario.grid_cell,
    )
    return PlannedScan(
        plan=attach_base_paths(plan, grid, start),
        start=start,
        explorative=explorative,
        dictionary=dictionary,
    )


def expected_report(scenario: ScenarioConfig, planned: PlannedScan) -> CoverageReport:
    """Coverage of the reference the planned views would give, before scanning."""
    report = coverage_curve(
        planned.dictionary,
        planned.plan,
        reference_model(scenario),
        scenario.camera,
        explorative=planned.explorative,
        voxel=scenario.stitch.voxel,
    )
    return _timed(scenario, report, planned.plan)


def run_workflow(
    scenario: ScenarioConfig,
    start: Union[BasePose, str] = 'random',
    prepared: Optional[Prepared] = None,
) -> WorkflowResult:
    """
    Simulate one complete scan from `start`.

    After planning (see `plan_scan`) the explorative view and every planned
    view are captured from the true body, frame `i` drawing its pose jitter
    and depth noise from streams `i` of the jitter and noise seeds. The
    explorative frame anchors the stitching, followed by one group per stop,
    and the stitched cloud is judged against the high-resolution reference.
    """
    planned = plan_scan(scenario, start, prepared)
    plan = planned.plan
    truth = make_body(scenario, scenario.evaluation_resolution)
    seeds = scenario.seeds

    def capture(index: int, commanded: Pose) -> ScanFrame:
        return render_scan(
            scenario.camera,
            commanded,
            truth,
            seed=[seeds.jitter, index],
            noise_seed=[seeds.noise, index],
        )

    explorative_frame = capture(0, planned.explorative)
    frames_by_stop: List[Tuple[ScanFrame, ...]] = []
    index = 1
    for stop in plan.stops:
        frames_by_stop.append(tuple(
            capture(index + i, view.camera)
            for i, view in enumerate(stop.views)
        ))
        index += len(stop.views)

    stitch = stitch_full(
        [(explorative_frame,)] + frames_by_stop,
        voxel=scenario.stitch.voxel,
        max_corr_dist=scenario.stitch.max_corr_dist,
        max_iters=scenario.stitch.max_iters,
        outlier_k=scenario.stitch.outlier_k,
        outlier_sigma=scenario.stitch.outlier_sigma,
    )

    report = coverage_curve(
        planned.dictionary,
        plan,
        reference_model(scenario),
        scenario.camera,
        explorative=planned.explorative,
        scan=stitch.cloud,
        voxel=scenario.stitch.voxel,
    )
    return WorkflowResult(
        stitch=stitch,
        report=_timed(scenario, report, plan),
        plan=plan,
        start=planned.start,
        explorative_frame=explorative_frame,
        frames_by_stop=tuple(frames_by_stop),
    )


def write_report(directory: Path, report: CoverageReport) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    write_report_csv(directory / 'report.csv', report)
    (directory / 'report.txt').write_text(format_report_text(report))
    plot_coverage_svg(directory / 'coverage.svg', report)


def write_plan(
    directory: Path,
    plan: ScanPlan,
    report: CoverageReport,
    config: Mapping[str, object],
) -> None:
    """Store a plan, the coverage it is expected to give and its configuration."""
    write_report(directory, report)
    (directory / 'plan.txt').write_text(format_plan(plan))
    gains_table(plan).to_csv(directory / 'gains.csv', index=False)
    (directory / 'effective-config.txt').write_text(dump_config(config))


def write_run(directory: Path, result: WorkflowResult, config: Mapping[str, object]) -> None:
    """
    Store everything a simulated scan produced in `directory`. Frames are
    numbered as they were captured, the explorative frame first.
    """
    write_plan(directory, result.plan, result.report, config)
    write_stitch_result(directory, result.stitch)
    frames = [result.explorative_frame]
    for stop in result.frames_by_stop:
        frames.extend(stop)
    for index, frame in enumerate(frames):
        write_frame(directory / 'frames', index, frame)
    LOGGER.info("Run written to %s", directory)


def report_row(result: WorkflowResult) -> Dict[str, object]:
    report = result.report
    row: Dict[str, object] = {
        'x': result.start.x,
        'y': result.start.y,
        'heading': result.start.heading,
    }
    row.update(zip(report.stage_labels(), report.per_stage_coverage))
    row.update({
        'coverage_pct': report.coverage_pct,
        'mean_distance_mm': 1000 * report.mean_distance,
        'plan_time_s': report.plan_time,
        'travel_m': report.travel_distance,
    })
    return row


def _run_start(job: Tuple[ScenarioConfig, Prepared]) -> Dict[str, object]:
    scenario, prepared = job
    return report_row(run_workflow(scenario, 'random', prepared))


def run_monte_carlo(
    scenario: ScenarioConfig,
    n_starts: int,
    prepared: Optional[Prepared] = None,
) -> pd.DataFrame:
    """
    Repeat the workflow from `n_starts` random start poses, start `i` using
    jitter and noise seeds offset by `i`. One row per start, then `mean` and
    `std` rows.
    """
    if n_starts < 1:
        raise ValueError("Need at least one start, got {!r}".format(n_starts))
    if prepared is None:
        prepared = analyze_scenario(scenario)

    jobs = [
        (
            scenario._replace(seeds=scenario.seeds._replace(
                jitter=scenario.seeds.jitter + i,
                noise=scenario.seeds.noise + i,
            )),
            prepared,
        )
        for i in range(n_starts)
    ]
    workers = scenario.analysis.workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_run_start, jobs))
    else:
        rows = [_run_start(x) for x in jobs]

    table = pd.DataFrame(rows)
    table.insert(0, 'start', [str(i) for i in range(n_starts)])
    summary = table.drop(columns=['start']).agg(['mean', 'std'])
    summary.insert(0, 'start', summary.index)
    return pd.concat([table, summary], ignore_index=True)


def final_coverages(table: pd.DataFrame) -> Sequence[float]:
    """The realised coverage of each start in a Monte-Carlo table."""
    starts = table[~table['start'].isin(['mean', 'std'])]
    return [float(x) for x in starts['coverage_pct']]
