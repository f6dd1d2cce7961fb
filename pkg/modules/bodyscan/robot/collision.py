"""
Coarse collision screening of robot configurations near the couch.

The couch is a solid box from the floor to its top, the body is its mesh
together with its surface samples, and the arm is the polyline through its
joint origins.
"""

from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial import cKDTree

from .params import BasePose, ArmConfig, RobotParams
from ..bodies import CouchSpec, SurfaceModel
from ..geometry import (
    FloatArray,
    footprint_corners,
    segments_cross_mesh,
    polygon_overlaps_rectangle,
)
from .kinematics import link_origins

if TYPE_CHECKING:
    from ..cspace.workspace import WorkspaceSpec

# Spacing of the points tested along each link (m).
LINK_STEP = 0.02


def base_footprint(params: RobotParams, base: BasePose) -> FloatArray:
    width, depth = params.base_footprint
    return footprint_corners(base.x, base.y, base.heading, width, depth)


def base_fits(
    params: RobotParams,
    base: BasePose,
    couch: CouchSpec,
    workspace: 'WorkspaceSpec',
) -> bool:
    """Whether the base footprint is on free floor and clear of the couch."""
    corners = base_footprint(params, base)
    return workspace.admits(corners) and not polygon_overlaps_rectangle(
        corners,
        couch.footprint(),
    )


def _link_points(origins: FloatArray) -> FloatArray:
    points = [origins[:1]]
    for start, end in zip(origins[:-1], origins[1:]):
        steps = max(1, int(np.ceil(np.linalg.norm(end - start) / LINK_STEP)))
        fractions = np.arange(1, steps + 1)[:, np.newaxis] / steps
        points.append(start + fractions * (end - start))
    return np.concatenate(points)


def _box_distances(points: FloatArray, low: FloatArray, high: FloatArray) -> FloatArray:
    outside = np.maximum(np.maximum(low - points, 0), points - high)
    result: FloatArray = np.linalg.norm(outside, axis=1)
    return result


def arm_clear(
    params: RobotParams,
    base: BasePose,
    arm: ArmConfig,
    couch: CouchSpec,
    body: SurfaceModel,
) -> bool:
    """Whether every arm link keeps `link_clearance` from the couch and body."""
    origins = link_origins(params, base, arm)
    if origins[-1, 2] <= couch.height:
        return False

    points = _link_points(origins)
    low, high = couch.box()
    if _box_distances(points, low, high).min() < params.link_clearance:
        return False

    # Links passing through the surface between samples.
    if segments_cross_mesh(origins[:-1], origins[1:], body.mesh).any():
        return False

    if len(body.samples):
        distances, _ = cKDTree(body.samples.points).query(points, k=1)
        if float(np.min(distances)) < params.link_clearance:
            return False
    return True


def check_config(
    params: RobotParams,
    base: BasePose,
    arm: ArmConfig,
    couch: CouchSpec,
    body: SurfaceModel,
    workspace: 'WorkspaceSpec',
) -> bool:
    """
    Whether the robot may take this configuration: the base stands on free
    floor off the couch, the arm keeps its clearance from couch and body, and
    the camera is above the couch top.
    """
    return (
        base_fits(params, base, couch, workspace) and
        arm_clear(params, base, arm, couch, body)
    )
