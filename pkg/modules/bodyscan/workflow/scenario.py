"""
Typed scenario assembled from a validated configuration.
"""

import math
import logging
from typing import List, Mapping, NamedTuple
from pathlib import Path

from ..robot import RobotParams, default_robot_params
from .config import check_value
from ..bodies import (
    CouchSpec,
    SurfaceModel,
    model_from_mesh,
    strip_underside,
    make_half_cylinder,
    make_supine_humanoid,
)
from ..cspace import WorkspaceSpec, make_workspace, AnalysisSettings
from ..errors import ConfigError
from ..sensor import CameraModel
from ..geometry import read_ply_mesh

LOGGER = logging.getLogger(__name__)


class Seeds(NamedTuple):
    sampling: int  # body model sampling
    jitter: int  # camera pose jitter and random start poses
    noise: int  # depth noise


class StitchSettings(NamedTuple):
    voxel: float
    max_corr_dist: float
    max_iters: int
    outlier_k: int
    outlier_sigma: float


class ScenarioConfig(NamedTuple):
    body_kind: str
    body_length: float
    body_radius: float
    body_mesh_path: str
    couch: CouchSpec
    workspace: WorkspaceSpec
    camera: CameraModel
    robot: RobotParams
    max_bases: int
    max_views: int
    seeds: Seeds
    resolution: float  # planning model sample spacing (m)
    evaluation_resolution: float  # reference sample spacing (m)
    analysis: AnalysisSettings
    planning_proxy: str
    grid_cell: float
    stitch: StitchSettings
    view_dwell: float
    stop_settle: float


def _float(config: Mapping[str, object], key: str) -> float:
    value = check_value(key, config[key])
    assert isinstance(value, float)
    return value


def _int(config: Mapping[str, object], key: str) -> int:
    value = check_value(key, config[key])
    assert isinstance(value, int)
    return value


def _str(config: Mapping[str, object], key: str) -> str:
    value = check_value(key, config[key])
    assert isinstance(value, str)
    return value


def _floats(config: Mapping[str, object], key: str) -> List[float]:
    value = check_value(key, config[key])
    assert isinstance(value, list)
    return value


def build_scenario(config: Mapping[str, object]) -> ScenarioConfig:
    """Turn a configuration (see `load_config`) into validated model objects."""
    try:
        couch = CouchSpec(
            length=_float(config, 'couch.length'),
            width=_float(config, 'couch.width'),
            height=_float(config, 'couch.height'),
        ).validated()
        workspace = make_workspace(
            _str(config, 'workspace.kind'),
            couch,
            corridor=_float(config, 'workspace.corridor'),
            margin=_float(config, 'workspace.margin'),
            blocked_side=_str(config, 'workspace.blocked_side'),
        )
        camera = CameraModel(
            h_fov=math.radians(_float(config, 'camera.h_fov_deg')),
            v_fov=math.radians(_float(config, 'camera.v_fov_deg')),
            min_range=_float(config, 'camera.min_range'),
            max_range=_float(config, 'camera.max_range'),
            max_incidence=math.radians(_float(config, 'camera.max_incidence_deg')),
            noise_sigma=_float(config, 'camera.noise_sigma'),
            pose_jitter=(
                math.radians(_float(config, 'camera.jitter_rot_deg')),
                _float(config, 'camera.jitter_trans'),
            ),
        ).validated()
        robot = default_robot_params(
            dh_a=_floats(config, 'robot.dh_a'),
            dh_d=_floats(config, 'robot.dh_d'),
            dh_alpha=_floats(config, 'robot.dh_alpha'),
            dh_theta_offset=_floats(config, 'robot.dh_theta_offset'),
            base_height=_float(config, 'robot.base_height'),
            arm_offset=_float(config, 'robot.arm_offset'),
            camera_link=_int(config, 'robot.camera_link'),
            camera_standoff=_float(config, 'robot.camera_standoff'),
            footprint=(
                _float(config, 'robot.footprint_width'),
                _float(config, 'robot.footprint_depth'),
            ),
            base_speed=_float(config, 'robot.base_speed'),
        )
        analysis = AnalysisSettings(
            standoffs=tuple(_floats(config, 'analysis.standoffs')),
            spacing=_float(config, 'analysis.spacing'),
            view_standoff=_float(config, 'analysis.view_standoff'),
            target_spacing_factor=_float(config, 'analysis.target_spacing_factor'),
            workers=_int(config, 'analysis.workers'),
        ).validated()
        scenario = ScenarioConfig(
            body_kind=_str(config, 'body.kind'),
            body_length=_float(config, 'body.length'),
            body_radius=_float(config, 'body.radius'),
            body_mesh_path=_str(config, 'body.mesh_path'),
            couch=couch,
            workspace=workspace,
            camera=camera,
            robot=robot,
            max_bases=_int(config, 'budgets.max_bases'),
            max_views=_int(config, 'budgets.max_views'),
            seeds=Seeds(
                sampling=_int(config, 'seeds.sampling'),
                jitter=_int(config, 'seeds.jitter'),
                noise=_int(config, 'seeds.noise'),
            ),
            resolution=_float(config, 'resolution'),
            evaluation_resolution=_float(config, 'evaluation.resolution'),
            analysis=analysis,
            planning_proxy=_str(config, 'planning.proxy'),
            grid_cell=_float(config, 'planning.grid_cell'),
            stitch=StitchSettings(
                voxel=_float(config, 'stitch.voxel'),
                max_corr_dist=_float(config, 'stitch.max_corr_dist'),
                max_iters=_int(config, 'stitch.max_iters'),
                outlier_k=_int(config, 'stitch.outlier_k'),
                outlier_sigma=_float(config, 'stitch.outlier_sigma'),
            ),
            view_dwell=_float(config, 'timing.view_dwell'),
            stop_settle=_float(config, 'timing.stop_settle'),
        )
    except KeyError as e:
        raise ConfigError("Missing configuration key {}".format(e)) from e
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e

    if scenario.body_kind == 'mesh' and not scenario.body_mesh_path:
        raise ConfigError("body.kind = mesh needs body.mesh_path")
    for name in ('max_bases', 'max_views', 'grid_cell', 'resolution', 'evaluation_resolution'):
        if not getattr(scenario, name) > 0:
            raise ConfigError("{} must be positive, got {!r}".format(
                name,
                getattr(scenario, name),
            ))
    if min(scenario.seeds) < 0:
        raise ConfigError("Seeds must not be negative, got {!r}".format(tuple(scenario.seeds)))
    return scenario


def make_body(scenario: ScenarioConfig, resolution: float) -> SurfaceModel:
    """The configured body, sampled `resolution` apart."""
    if scenario.body_kind == 'half_cylinder':
        return make_half_cylinder(
            scenario.body_length,
            scenario.body_radius,
            scenario.couch,
            resolution,
        )
    if scenario.body_kind == 'humanoid':
        return make_supine_humanoid(
            scenario.couch,
            resolution,
            scenario.seeds.sampling,
            height=scenario.body_length,
        )
    mesh = read_ply_mesh(Path(scenario.body_mesh_path))
    name = Path(scenario.body_mesh_path).stem
    return model_from_mesh(name, mesh, scenario.couch, resolution, scenario.seeds.sampling)


def planning_model(scenario: ScenarioConfig) -> SurfaceModel:
    """
    The surface views are planned on: the body itself, or a half-cylinder of
    the body's length and radius standing in for an unknown body.
    """
    if scenario.planning_proxy == 'half_cylinder':
        return make_half_cylinder(
            scenario.body_length,
            scenario.body_radius,
            scenario.couch,
            scenario.resolution,
        )
    return make_body(scenario, scenario.resolution)


def reference_model(scenario: ScenarioConfig) -> SurfaceModel:
    """High-resolution samples of the body, couch side removed."""
    return strip_underside(make_body(scenario, scenario.evaluation_resolution))
