"""
Coverage accumulated stage by stage over a scan plan.
"""

import math
import logging
from typing import List, Tuple, Optional, NamedTuple

import numpy as np

from ..bodies import SurfaceModel, strip_underside
from ..cspace import ConfigDictionary
from ..sensor import CameraModel, visible_points
from ..planner import ScanPlan
from .coverage import coverage, COVERAGE_VOXEL, mean_surface_distance
from ..geometry import Pose, PointCloud

LOGGER = logging.getLogger(__name__)

GROUND_TRUTH_SAMPLES = 'ground_truth_samples'
EXTERNAL_REFERENCE = 'external_reference'


class CoverageReport(NamedTuple):
    coverage_pct: float  # realised by the scan when one was given
    mean_distance: float  # m, nan without a scan
    # Cumulative percentages: the explorative capture (when there was one),
    # then after each stop.
    per_stage_coverage: Tuple[float, ...]
    reference_kind: str
    voxel: float
    n_reference_points: int
    explorative: bool = False
    plan_time: float = math.nan  # s
    travel_distance: float = math.nan  # m

    def stage_labels(self) -> List[str]:
        labels = ['explorative'] if self.explorative else []
        start = len(labels)
        labels.extend(
            '+{} base{}'.format(n, '' if n == 1 else 's')
            for n in range(1, len(self.per_stage_coverage) - start + 1)
        )
        return labels


def coverage_curve(
    dictionary: ConfigDictionary,
    plan: ScanPlan,
    reference: SurfaceModel,
    cam: CameraModel,
    explorative: Optional[Pose] = None,
    scan: Optional[PointCloud] = None,
    voxel: float = COVERAGE_VOXEL,
) -> CoverageReport:
    """
    Cumulative coverage of `reference` after the explorative capture and
    after each of the plan's stops.

    Stages are judged by the noise-free visibility of each selected camera
    pose on the reference samples, independent of the planning resolution.
    With a `scan`, the realised coverage and surface distance of that scan
    are reported too.
    """
    if plan.n_samples != dictionary.n_samples:
        raise ValueError("Plan covers {} samples but the dictionary has {}".format(
            plan.n_samples,
            dictionary.n_samples,
        ))
    if not reference.stripped:
        reference = strip_underside(reference)

    covered = np.zeros(len(reference.samples), dtype=bool)
    stages: List[float] = []

    def percentage() -> float:
        if not len(reference.samples):
            return 0.
        return 100. * float(np.count_nonzero(covered)) / len(reference.samples)

    if explorative is not None:
        covered[visible_points(cam, explorative, reference)] = True
        stages.append(percentage())
    for stop in plan.stops:
        for view in stop.views:
            covered[visible_points(cam, view.camera, reference)] = True
        stages.append(percentage())

    if scan is not None:
        realised = coverage(scan, reference.samples, voxel)
        distance = mean_surface_distance(scan, reference.samples) if len(scan) else math.nan
    else:
        realised = stages[-1] if stages else 0.
        distance = math.nan

    LOGGER.info(
        "Coverage by stage: %s; realised %.2f %%",
        ', '.join('{:.2f}'.format(x) for x in stages),
        realised,
    )
    return CoverageReport(
        coverage_pct=realised,
        mean_distance=distance,
        per_stage_coverage=tuple(stages),
        reference_kind=GROUND_TRUTH_SAMPLES,
        voxel=voxel,
        n_reference_points=len(reference.samples),
        explorative=explorative is not None,
    )


def evaluate_scan(
    scan: PointCloud,
    reference: PointCloud,
    voxel: float = COVERAGE_VOXEL,
) -> CoverageReport:
    """Coverage and surface distance of a scan against an external reference."""
    return CoverageReport(
        coverage_pct=coverage(scan, reference, voxel),
        mean_distance=mean_surface_distance(scan, reference),
        per_stage_coverage=(),
        reference_kind=EXTERNAL_REFERENCE,
        voxel=voxel,
        n_reference_points=len(reference),
    )
