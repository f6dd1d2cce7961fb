"""
Simulated depth captures of a surface model.
"""

import logging
from typing import Optional, NamedTuple
from pathlib import Path

import numpy as np

from ..utils import Seed, make_rng, spawn_rng
from .camera import CameraModel, jitter_pose, RANGE_SLACK
from ..bodies import SurfaceModel
from ..geometry import Pose, unit_rows, write_ply, IndexArray, PointCloud
from .visibility import visible_points

LOGGER = logging.getLogger(__name__)

# Child stream of the frame seed drawn for depth noise when no noise seed is given.
NOISE_STREAM = 0


class ScanFrame(NamedTuple):
    camera_pose_commanded: Pose
    camera_pose_actual: Pose
    cloud: PointCloud  # in the actual camera frame
    visible_indices: IndexArray  # noise-free ground truth into the model's samples

    def world_cloud(self, pose: Optional[Pose] = None) -> PointCloud:
        """
        The cloud placed in the world by `pose`, the commanded camera pose
        unless given; that is all a real scanner knows of where it was.
        """
        return self.cloud.transformed(self.camera_pose_commanded if pose is None else pose)


def render_scan(
    cam: CameraModel,
    commanded: Pose,
    truth: SurfaceModel,
    seed: Seed,
    noise_seed: Optional[Seed] = None,
) -> ScanFrame:
    """
    Capture `truth` from `commanded`, as displaced by the camera's pose
    jitter.

    The returned cloud holds the visible samples in the actual camera frame,
    each pushed along its view ray by Gaussian depth noise. `seed` drives the
    jitter and `noise_seed` the depth noise; without a noise seed the noise
    comes from a child stream of `seed`, so the two are never correlated.
    """
    rotation_sigma, translation_sigma = cam.pose_jitter
    actual = jitter_pose(commanded, rotation_sigma, translation_sigma, make_rng(seed))

    visible = visible_points(cam, actual, truth)
    local = truth.samples.select(visible).transformed(actual.inverse())

    points = local.points
    if len(points) and cam.noise_sigma > 0:
        if noise_seed is None:
            noise_rng = spawn_rng(seed, NOISE_STREAM)
        else:
            noise_rng = make_rng(noise_seed)
        rays = unit_rows(points)
        points = points + rays * noise_rng.normal(scale=cam.noise_sigma, size=(len(points), 1))

    if len(points):
        low, high = RANGE_SLACK
        distances = np.linalg.norm(points, axis=1)
        clipped = np.clip(distances, low * cam.min_range, high * cam.max_range)
        points = points * (clipped / distances)[:, np.newaxis]

    LOGGER.debug("Captured %d of %d samples", len(visible), len(truth.samples))
    return ScanFrame(
        camera_pose_commanded=commanded,
        camera_pose_actual=actual,
        cloud=PointCloud(points, local.normals),
        visible_indices=visible,
    )


def _pose_line(label: str, pose: Pose) -> str:
    values = np.concatenate((pose.translation, pose.quaternion))
    return '{}: {}\n'.format(label, ' '.join('{:.9f}'.format(x) for x in values))


def write_frame(directory: Path, index: int, frame: ScanFrame) -> Path:
    """
    Write a frame's cloud as ``frame-NNN.ply`` beside ``frame-NNN.txt``,
    which records both camera poses as ``x y z qx qy qz qw``.
    """
    directory.mkdir(parents=True, exist_ok=True)
    stem = 'frame-{:03d}'.format(index)
    path = directory / (stem + '.ply')
    write_ply(path, frame.cloud)
    (directory / (stem + '.txt')).write_text(
        _pose_line('commanded', frame.camera_pose_commanded) +
        _pose_line('actual', frame.camera_pose_actual) +
        'points: {}\n'.format(len(frame.cloud)),
    )
    return path
