"""
Statistical outlier removal.
"""

import numpy as np
from sklearn.neighbors import NearestNeighbors

from ..geometry import PointCloud

OUTLIER_K = 20
OUTLIER_SIGMA = 2.0


def remove_outliers(
    cloud: PointCloud,
    k: int = OUTLIER_K,
    sigma_mult: float = OUTLIER_SIGMA,
) -> PointCloud:
    """
    Drop points whose mean distance to their `k` nearest neighbours exceeds
    the cloud-wide mean of that statistic by more than `sigma_mult` standard
    deviations. Clouds of at most `k` points are returned unchanged.
    """
    if k < 1:
        raise ValueError("Neighbour count must be at least one, got {!r}".format(k))
    if len(cloud) < k + 1:
        return cloud

    # Each point is its own nearest neighbour; skip that column.
    search = NearestNeighbors(n_neighbors=k + 1).fit(cloud.points)
    distances, _ = search.kneighbors(cloud.points)
    mean_distances = distances[:, 1:].mean(axis=1)

    limit = mean_distances.mean() + sigma_mult * mean_distances.std()
    return cloud.select(np.flatnonzero(mean_distances <= limit))
