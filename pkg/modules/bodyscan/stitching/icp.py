"""
Point-to-point iterative closest point registration.
"""

import logging
from typing import List, Tuple, NamedTuple

import numpy as np

from ..errors import InsufficientOverlap
from ..geometry import Pose, FloatArray, PointCloud, NeighborIndex

LOGGER = logging.getLogger(__name__)

MIN_CORRESPONDENCES = 10

# Iteration stops once the RMS improves by less than this (m).
CONVERGENCE = 1e-7


class IcpResult(NamedTuple):
    correction: Pose  # maps the source onto the target
    rms: float  # m, over the final correspondences
    residuals: Tuple[float, ...]  # RMS after each accepted iteration, non-increasing


def best_fit_transform(source: FloatArray, target: FloatArray) -> Pose:
    """Rigid motion minimising the squared distances between paired rows."""
    source_centre = source.mean(axis=0)
    target_centre = target.mean(axis=0)
    covariance = (source - source_centre).T @ (target - target_centre)

    u, _, vt = np.linalg.svd(covariance)
    correction = np.diag((1., 1., np.sign(np.linalg.det(vt.T @ u.T))))
    rotation = vt.T @ correction @ u.T

    matrix = np.eye(4)
    matrix[:3, :3] = rotation
    matrix[:3, 3] = target_centre - rotation @ source_centre
    return Pose.from_matrix(matrix)


def _correspond(
    index: NeighborIndex,
    points: FloatArray,
    max_corr_dist: float,
) -> Tuple[float, FloatArray, FloatArray]:
    distances, indices = index.query(points, max_corr_dist)
    inliers = np.isfinite(distances)
    count = int(np.count_nonzero(inliers))
    if count < MIN_CORRESPONDENCES:
        raise InsufficientOverlap("Only {} correspondences within {} m".format(
            count,
            max_corr_dist,
        ))
    rms = float(np.sqrt(np.mean(distances[inliers] ** 2)))
    return rms, points[inliers], index.points[indices[inliers]]


def icp_point_to_point(
    source: PointCloud,
    target: PointCloud,
    max_corr_dist: float,
    max_iters: int,
) -> IcpResult:
    """
    Align `source` to `target`.

    Each iteration pairs every source point with its nearest target point
    within `max_corr_dist` and applies the best rigid fit to those pairs. An
    iteration that would raise the RMS is discarded and ends the loop, as
    does an improvement below 1e-7 m.
    """
    if len(source) < MIN_CORRESPONDENCES or len(target) < MIN_CORRESPONDENCES:
        raise InsufficientOverlap("Clouds of {} and {} points are too small to align".format(
            len(source),
            len(target),
        ))

    index = NeighborIndex(target.points)
    current = Pose.identity()
    rms, paired_source, paired_target = _correspond(index, source.points, max_corr_dist)
    residuals: List[float] = [rms]

    for _ in range(max_iters):
        candidate = best_fit_transform(paired_source, paired_target).compose(current)
        candidate_rms, candidate_source, candidate_target = _correspond(
            index,
            candidate.apply(source.points),
            max_corr_dist,
        )
        if candidate_rms > rms:
            break

        improvement = rms - candidate_rms
        current, rms = candidate, candidate_rms
        paired_source, paired_target = candidate_source, candidate_target
        residuals.append(rms)
        if improvement < CONVERGENCE:
            break

    LOGGER.debug("ICP: %d iterations, rms %.5f m", len(residuals) - 1, rms)
    return IcpResult(current, rms, tuple(residuals))
