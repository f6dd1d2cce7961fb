"""
Reconstruction of a full-body cloud from the frames captured at each stop.

Frames of one stop are merged using their commanded camera poses, then the
stop clouds are registered one after another onto the union of those already
placed, the first stop being the anchor.
"""

import math
import logging
from typing import List, Tuple, Sequence, NamedTuple
from pathlib import Path

import numpy as np
import pandas as pd

from .icp import icp_point_to_point
from ..errors import NoFrames, CoarseAlignmentFailure
from ..sensor import ScanFrame
from .outliers import OUTLIER_K, OUTLIER_SIGMA, remove_outliers
from ..geometry import Pose, write_ply, PointCloud, concatenate, voxel_downsample

LOGGER = logging.getLogger(__name__)

STITCH_VOXEL = 0.01
MAX_CORR_DIST = 0.05
MAX_ITERS = 50
MAX_CORRECTION = math.radians(30)


class StitchResult(NamedTuple):
    cloud: PointCloud  # world frame
    per_stage_transforms: Tuple[Pose, ...]  # ICP correction per stop, identity for the anchor
    icp_residuals: Tuple[float, ...]  # m, per stop
    rejected_outliers: int


def coarse_assemble(
    frames_by_stop: Sequence[Sequence[ScanFrame]],
    voxel: float = STITCH_VOXEL,
) -> List[PointCloud]:
    """One world-frame cloud per stop, placed by the commanded camera poses."""
    if not any(frames_by_stop):
        raise NoFrames("No frames were captured")
    return [
        voxel_downsample(concatenate([x.world_cloud() for x in frames]), voxel)
        for frames in frames_by_stop
    ]


def stitch_full(
    frames_by_stop: Sequence[Sequence[ScanFrame]],
    voxel: float = STITCH_VOXEL,
    max_corr_dist: float = MAX_CORR_DIST,
    max_iters: int = MAX_ITERS,
    outlier_k: int = OUTLIER_K,
    outlier_sigma: float = OUTLIER_SIGMA,
) -> StitchResult:
    stop_clouds = coarse_assemble(frames_by_stop, voxel)

    aligned: List[PointCloud] = []
    corrections: List[Pose] = []
    residuals: List[float] = []
    for number, cloud in enumerate(stop_clouds, start=1):
        if not any(len(x) for x in aligned) or not len(cloud):
            if not len(cloud):
                LOGGER.warning("Stop %d captured no points", number)
            aligned.append(cloud)
            corrections.append(Pose.identity())
            residuals.append(0.)
            continue

        result = icp_point_to_point(cloud, concatenate(aligned), max_corr_dist, max_iters)
        angle = result.correction.rotation_angle()
        if angle > MAX_CORRECTION:
            raise CoarseAlignmentFailure("Stop {} needed a {:.1f} degree correction".format(
                number,
                math.degrees(angle),
            ))

        LOGGER.info(
            "Stop %d aligned: %.2f deg, %.1f mm, rms %.2f mm",
            number,
            math.degrees(angle),
            1000 * float(np.linalg.norm(result.correction.translation)),
            1000 * result.rms,
        )
        aligned.append(cloud.transformed(result.correction))
        corrections.append(result.correction)
        residuals.append(result.rms)

    merged = concatenate(aligned)
    kept = remove_outliers(merged, outlier_k, outlier_sigma)
    rejected = len(merged) - len(kept)
    LOGGER.info("Removed %d of %d points as outliers", rejected, len(merged))

    return StitchResult(
        cloud=voxel_downsample(kept, voxel),
        per_stage_transforms=tuple(corrections),
        icp_residuals=tuple(residuals),
        rejected_outliers=rejected,
    )


def corrections_table(result: StitchResult) -> pd.DataFrame:
    corrections = result.per_stage_transforms
    return pd.DataFrame(
        {
            'stage': np.arange(1, len(corrections) + 1),
            'angle_deg': [math.degrees(x.rotation_angle()) for x in corrections],
            'translation_m': [float(np.linalg.norm(x.translation)) for x in corrections],
            'rms_m': result.icp_residuals,
        },
        columns=['stage', 'angle_deg', 'translation_m', 'rms_m'],
    )


def write_stitch_result(directory: Path, result: StitchResult) -> None:
    """Write `stitched.ply` and `corrections.csv` into `directory`."""
    directory.mkdir(parents=True, exist_ok=True)
    write_ply(directory / 'stitched.ply', result.cloud)
    corrections_table(result).to_csv(directory / 'corrections.csv', index=False)
