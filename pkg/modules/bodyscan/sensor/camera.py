"""
The depth camera's intrinsic limits and its capture error model.
"""

import math
from typing import Tuple, NamedTuple

import numpy as np

from ..geometry import Pose

# Samples this close behind a blocking surface still count as seen (m).
OCCLUSION_TOLERANCE = 0.005

# Returned depths are clamped to this band around the valid range.
RANGE_SLACK = (0.9, 1.1)


class CameraModel(NamedTuple):
    h_fov: float = math.radians(75)
    v_fov: float = math.radians(65)
    min_range: float = 0.5
    max_range: float = 3.86
    # Largest angle between view ray and surface normal still returning depth.
    max_incidence: float = math.radians(60)
    noise_sigma: float = 0.002  # m, along the view ray
    pose_jitter: Tuple[float, float] = (math.radians(0.5), 0.005)  # rad, m

    def validated(self) -> 'CameraModel':
        if not 0 < self.min_range < self.max_range:
            raise ValueError("Camera range must satisfy 0 < min < max, got {!r}".format(
                (self.min_range, self.max_range),
            ))
        for name in ('h_fov', 'v_fov'):
            value = getattr(self, name)
            if not 0 < value < math.pi:
                raise ValueError(
                    "Camera {} must lie within (0, π), got {!r}".format(name, value),
                )
        if not 0 < self.max_incidence <= math.pi / 2:
            raise ValueError("Maximum incidence must lie within (0, π/2], got {!r}".format(
                self.max_incidence,
            ))
        if self.noise_sigma < 0 or min(self.pose_jitter) < 0:
            raise ValueError("Noise levels must not be negative, got {!r}".format(
                (self.noise_sigma, self.pose_jitter),
            ))
        return self

    def noiseless(self) -> 'CameraModel':
        return self._replace(noise_sigma=0., pose_jitter=(0., 0.))


def jitter_pose(
    pose: Pose,
    rotation_sigma: float,
    translation_sigma: float,
    rng: np.random.Generator,
) -> Pose:
    """
    Perturb a pose by a small random rigid motion in its own frame: a
    rotation vector and a translation with the given per-axis deviations.
    """
    jitter = Pose.from_rotvec(
        rng.normal(scale=rotation_sigma, size=3),
        rng.normal(scale=translation_sigma, size=3),
    )
    return pose.compose(jitter)
