from .icp import IcpResult, best_fit_transform, icp_point_to_point
from .outliers import OUTLIER_K, OUTLIER_SIGMA, remove_outliers
from .pipeline import (
    MAX_ITERS,
    stitch_full,
    STITCH_VOXEL,
    StitchResult,
    MAX_CORR_DIST,
    MAX_CORRECTION,
    coarse_assemble,
    corrections_table,
    write_stitch_result,
)

__all__ = (
    'IcpResult',
    'MAX_ITERS',
    'OUTLIER_K',
    'stitch_full',
    'STITCH_VOXEL',
    'StitchResult',
    'MAX_CORR_DIST',
    'OUTLIER_SIGMA',
    'MAX_CORRECTION',
    'coarse_assemble',
    'remove_outliers',
    'corrections_table',
    'best_fit_transform',
    'icp_point_to_point',
    'write_stitch_result',
)
