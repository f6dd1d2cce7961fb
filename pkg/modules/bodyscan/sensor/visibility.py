"""
Which surface samples a depth camera returns from a given pose.

A sample is seen when it lies inside the viewing frustum, within the
camera's depth range, faces the camera no more obliquely than the maximum
incidence angle and nothing on the body mesh stands in front of it.
"""

import math

import numpy as np
import numpy.typing as npt

from .camera import CameraModel, OCCLUSION_TOLERANCE
from ..bodies import SurfaceModel
from ..geometry import Pose, IndexArray, segments_occluded


def in_view(cam: CameraModel, pose: Pose, model: SurfaceModel) -> npt.NDArray[np.bool_]:
    """Frustum, range and incidence tests of every sample; no occlusion."""
    points = model.samples.points
    local = pose.inverse().apply(points)
    x, y, z = local.T

    distances = np.linalg.norm(local, axis=1)
    inside = (
        (z > 0) &
        (np.abs(np.arctan2(x, z)) <= cam.h_fov / 2) &
        (np.abs(np.arctan2(y, z)) <= cam.v_fov / 2) &
        (distances >= cam.min_range) &
        (distances <= cam.max_range)
    )

    towards_camera = pose.translation - points
    facing = np.einsum('ij,ij->i', towards_camera, model.normals)
    result: npt.NDArray[np.bool_] = inside & (
        facing >= math.cos(cam.max_incidence) * distances
    )
    return result


def visible_points(cam: CameraModel, pose: Pose, model: SurfaceModel) -> IndexArray:
    """Sorted indices of the samples the camera sees from `pose`."""
    candidates = np.flatnonzero(in_view(cam, pose, model))
    if not len(candidates):
        return candidates.astype(np.int64)

    occluded = segments_occluded(
        pose.translation,
        model.samples.points[candidates],
        model.mesh,
        OCCLUSION_TOLERANCE,
    )
    return candidates[~occluded].astype(np.int64)
