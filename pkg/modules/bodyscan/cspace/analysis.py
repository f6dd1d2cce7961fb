"""
The configuration-space analysis: which arm configurations each base
position offers and which surface samples each of them shows the camera.
"""

import time
import hashlib
import logging
from typing import Dict, List, Tuple, Optional, NamedTuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..robot import (
    BasePose,
    ArmConfig,
    base_fits,
    RobotParams,
    check_config,
    solve_arm_ik,
    forward_kinematics,
)
from ..bodies import CouchSpec, SurfaceModel
from ..sensor import CameraModel, visible_points
from ..geometry import (
    Pose,
    FloatArray,
    IndexArray,
    PointCloud,
    look_rotation,
    voxel_downsample,
)
from .workspace import WorkspaceSpec
from .candidates import AnalysisSettings, enumerate_base_candidates
from ..robot.kinematics import arm_mount

LOGGER = logging.getLogger(__name__)


class ConfigRecord(NamedTuple):
    base: BasePose
    arm: ArmConfig
    camera: Pose
    visible: IndexArray


class ConfigDictionary(NamedTuple):
    bases: Tuple[BasePose, ...]
    records: Tuple[ConfigRecord, ...]
    # Index into `bases` of each record; records are grouped by base.
    base_of: Tuple[int, ...]
    model_resolution: float
    n_samples: int
    analysis_time_per_base: float  # seconds
    params_hash: str

    @property
    def n_records(self) -> int:
        return len(self.records)

    def records_by_base(self) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = {}
        for index, base in enumerate(self.base_of):
            groups.setdefault(base, []).append(index)
        return groups

    def visible_union(self) -> IndexArray:
        if not self.records:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([x.visible for x in self.records])).astype(np.int64)


def view_targets(model: SurfaceModel, settings: AnalysisSettings) -> PointCloud:
    """Surface points to aim the camera at, spaced per the settings."""
    return voxel_downsample(model.samples, settings.target_spacing_factor * model.resolution)


def _shoulder(params: RobotParams, base: BasePose) -> FloatArray:
    return (arm_mount(params, base) @ np.array((0., 0., params.dh_rows[0].d, 1.)))[:3]


def analyze_base_position(
    base: BasePose,
    model: SurfaceModel,
    params: RobotParams,
    cam: CameraModel,
    couch: CouchSpec,
    workspace: WorkspaceSpec,
    settings: AnalysisSettings = AnalysisSettings(),
) -> List[ConfigRecord]:
    """
    The views the arm can take from `base`.

    Each view looks straight down a target's surface normal from the view
    standoff. Views whose camera would sit below the couch top or beyond the
    arm's reach are skipped before solving; views the arm cannot reach or
    that collide are dropped.
    """
    if not base_fits(params, base, couch, workspace):
        return []

    targets = view_targets(model, settings)
    if not len(targets) or targets.normals is None:
        return []

    shoulder = _shoulder(params, base)
    reach = params.reach()
    seed = ArmConfig.zero()
    records = []
    for point, normal in zip(targets.points, targets.normals):
        position = point + settings.view_standoff * normal
        if position[2] <= couch.height or np.linalg.norm(position - shoulder) > reach:
            continue

        goal = Pose.from_rotation(look_rotation(-normal), position)
        arm = solve_arm_ik(params, base, goal, seed, free_roll=True)
        if arm is None or not check_config(params, base, arm, couch, model, workspace):
            continue

        seed = arm
        camera = forward_kinematics(params, base, arm)
        records.append(ConfigRecord(base, arm, camera, visible_points(cam, camera, model)))

    LOGGER.debug("Base %s: %d views", base, len(records))
    return records


class _Job(NamedTuple):
    base: BasePose
    model: SurfaceModel
    params: RobotParams
    cam: CameraModel
    couch: CouchSpec
    workspace: WorkspaceSpec
    settings: AnalysisSettings


def _run_job(job: _Job) -> Tuple[List[ConfigRecord], float]:
    start = time.perf_counter()
    records = analyze_base_position(*job)
    return records, time.perf_counter() - start


def params_hash(
    model: SurfaceModel,
    params: RobotParams,
    cam: CameraModel,
    couch: CouchSpec,
    workspace: WorkspaceSpec,
    settings: AnalysisSettings,
) -> str:
    """Digest of everything a dictionary's content depends on."""
    digest = hashlib.sha256()
    for array in (
        model.samples.points,
        model.normals,
        model.mesh.vertices,
        model.mesh.triangles,
        params.base_to_arm.matrix(),
        params.flange_to_camera.matrix(),
    ):
        digest.update(np.ascontiguousarray(array).tobytes())

    description = (
        model.resolution,
        tuple(params.dh_rows),
        params.camera_link,
        params.base_footprint,
        params.base_height,
        params.joint_limits,
        params.link_clearance,
        tuple(cam),
        tuple(couch),
        workspace.kind,
        workspace.free_region.corners,
        sorted(workspace.blocked_sides),
        tuple(settings._replace(workers=1)),
    )
    digest.update(repr(description).encode())
    return digest.hexdigest()


def build_dictionary(
    model: SurfaceModel,
    params: RobotParams,
    cam: CameraModel,
    couch: CouchSpec,
    workspace: WorkspaceSpec,
    settings: AnalysisSettings = AnalysisSettings(),
    candidates: Optional[List[BasePose]] = None,
) -> ConfigDictionary:
    """
    Analyse every candidate base position (all of them around the couch
    unless given) and gather the records in candidate order.

    With more than one worker, bases are analysed in separate processes;
    the result does not depend on the worker count.
    """
    if candidates is None:
        candidates = enumerate_base_candidates(couch, workspace, params, settings)
    jobs = [_Job(x, model, params, cam, couch, workspace, settings) for x in candidates]

    if settings.workers > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as executor:
            results = list(executor.map(_run_job, jobs))
    else:
        results = [_run_job(x) for x in jobs]

    records: List[ConfigRecord] = []
    base_of: List[int] = []
    for index, (base_records, _) in enumerate(results):
        records.extend(base_records)
        base_of.extend([index] * len(base_records))

    seconds = [duration for _, duration in results]
    dictionary = ConfigDictionary(
        bases=tuple(candidates),
        records=tuple(records),
        base_of=tuple(base_of),
        model_resolution=model.resolution,
        n_samples=len(model.samples),
        analysis_time_per_base=float(np.mean(seconds)) if seconds else 0.,
        params_hash=params_hash(model, params, cam, couch, workspace, settings),
    )
    LOGGER.info(
        "Dictionary: %d views over %d bases, %.2f s per base",
        len(records),
        len(candidates),
        dictionary.analysis_time_per_base,
    )
    return dictionary
