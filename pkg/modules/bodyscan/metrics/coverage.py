"""
Agreement between a scan and a reference surface.
"""

import numpy as np
import numpy.typing as npt

from ..errors import EmptyReference
from ..geometry import PointCloud, NeighborIndex

# Evaluation voxel; a reference point counts as covered within twice this.
COVERAGE_VOXEL = 0.01


def covered_mask(
    scan: PointCloud,
    reference: PointCloud,
    voxel: float = COVERAGE_VOXEL,
) -> npt.NDArray[np.bool_]:
    """Which reference points have a scan point within `2 * voxel`."""
    if not len(reference):
        raise EmptyReference("Coverage needs a non-empty reference")
    if not voxel > 0:
        raise ValueError("Voxel size must be positive, got {!r}".format(voxel))
    if not len(scan):
        return np.zeros(len(reference), dtype=bool)

    # cKDTree's bound is exclusive; the threshold itself counts as covered.
    limit = np.nextafter(2 * voxel, np.inf)
    distances, _ = NeighborIndex(scan.points).query(reference.points, limit)
    mask: npt.NDArray[np.bool_] = np.isfinite(distances)
    return mask


def coverage(scan: PointCloud, reference: PointCloud, voxel: float = COVERAGE_VOXEL) -> float:
    """Percentage of `reference` covered by `scan`."""
    covered = np.count_nonzero(covered_mask(scan, reference, voxel))
    return 100. * float(covered) / len(reference)


def mean_surface_distance(scan: PointCloud, reference: PointCloud) -> float:
    """Mean distance (m) from each scan point to the nearest reference point."""
    if not len(reference):
        raise EmptyReference("Surface distance needs a non-empty reference")
    if not len(scan):
        raise ValueError("Surface distance needs a non-empty scan")
    distances, _ = NeighborIndex(reference.points).query(scan.points)
    return float(distances.mean())
