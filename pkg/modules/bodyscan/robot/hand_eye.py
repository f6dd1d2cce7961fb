"""
Hand-eye calibration: solving AX = XB for the fixed camera mounting X.

Each pair holds a relative motion A of the arm's camera link (between two
robot poses) and the matching relative motion B of the camera, as a
calibration target observation would report it.
"""

import math
from typing import List, Tuple, Sequence, NamedTuple

import numpy as np

from ..utils import Seed, make_rng
from ..errors import DegenerateMotions
from ..geometry import Pose, FloatArray

MotionPair = Tuple[Pose, Pose]

MIN_PAIRS = 3

# Smallest ratio of the second to the first singular value of the rotation-axis
# correlation for the axes to count as non-parallel.
AXIS_RANK_TOLERANCE = 1e-9


class HandEyeErrors(NamedTuple):
    rotation_deg: float
    translation: float  # m
    translation_xyz: Tuple[float, float, float]  # signed, m


def solve_hand_eye(pairs: Sequence[MotionPair]) -> Pose:
    """
    Least-squares X with A·X = X·B over all pairs.

    The rotation aligns the rotation axes of the B motions with those of the
    A motions (log-map correlation solved by SVD); the translation then
    solves the stacked linear system ``(R_A - I) t_X = R_X t_B - t_A``.
    """
    if len(pairs) < MIN_PAIRS:
        raise DegenerateMotions("Need at least {} motion pairs, got {}".format(
            MIN_PAIRS,
            len(pairs),
        ))

    alphas = np.array([a.rotation.as_rotvec() for a, _ in pairs])
    betas = np.array([b.rotation.as_rotvec() for _, b in pairs])
    correlation = betas.T @ alphas

    u, singular, vt = np.linalg.svd(correlation)
    if singular[0] <= 0 or singular[1] / singular[0] < AXIS_RANK_TOLERANCE:
        raise DegenerateMotions("Motion rotation axes are parallel; X is not constrained")

    correction = np.diag((1., 1., np.sign(np.linalg.det(vt.T @ u.T))))
    rotation = vt.T @ correction @ u.T

    lhs = np.concatenate([a.rotation_matrix() - np.eye(3) for a, _ in pairs])
    rhs = np.concatenate([rotation @ b.translation - a.translation for a, b in pairs])
    translation, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)

    result = np.eye(4)
    result[:3, :3] = rotation
    result[:3, 3] = translation
    return Pose.from_matrix(result)


def hand_eye_errors(estimate: Pose, truth: Pose) -> HandEyeErrors:
    delta: FloatArray = estimate.translation - truth.translation
    return HandEyeErrors(
        rotation_deg=math.degrees(truth.angle_to(estimate)),
        translation=float(np.linalg.norm(delta)),
        translation_xyz=(float(delta[0]), float(delta[1]), float(delta[2])),
    )


def simulate_hand_eye_pairs(
    mounting: Pose,
    count: int,
    seed: Seed,
    rotation_noise: float = 0.,
    translation_noise: float = 0.,
) -> List[MotionPair]:
    """
    Synthetic motion pairs for a known mounting X: random arm motions A with
    rotations of 0.5–1.5 rad, B = X⁻¹·A·X, then Gaussian noise on B (per-axis
    rotation vector sigma in radians, translation sigma in metres).
    """
    rng = make_rng(seed)
    pairs = []
    for _ in range(count):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        motion = Pose.from_rotvec(axis * rng.uniform(0.5, 1.5), rng.normal(scale=0.1, size=3))

        camera_motion = mounting.inverse().compose(motion).compose(mounting)
        noise = Pose.from_rotvec(
            rng.normal(scale=rotation_noise, size=3),
            rng.normal(scale=translation_noise, size=3),
        )
        pairs.append((motion, camera_motion.compose(noise)))
    return pairs
