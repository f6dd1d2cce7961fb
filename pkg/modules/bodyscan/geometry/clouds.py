"""
Point clouds, voxel downsampling and nearest-neighbour queries.
"""

from typing import Tuple, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.spatial import cKDTree

from .pose import Pose, FloatArray
from ..errors import EmptyTarget

IndexArray = npt.NDArray[np.int64]

# Tolerance within which a normal's norm counts as unit.
NORMAL_TOLERANCE = 1e-6


def _readonly(array: FloatArray) -> FloatArray:
    array.flags.writeable = False
    return array


def _as_rows(values: 'npt.ArrayLike', name: str) -> FloatArray:
    array = np.array(values, dtype=float)
    if array.size == 0:
        array = array.reshape(0, 3)
    if array.ndim != 2 or array.shape[1] != 3:
        raise ValueError("{} must have shape (N, 3), got {!r}".format(name, array.shape))
    if not np.all(np.isfinite(array)):
        raise ValueError("{} contains non-finite values".format(name))
    return array


def unit_rows(vectors: FloatArray) -> FloatArray:
    """Normalise each row; zero rows are left as zero."""
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    result: FloatArray = np.divide(
        vectors,
        norms,
        out=np.zeros_like(vectors),
        where=norms > 0,
    )
    return result


class PointCloud:
    """
    Points in metres with optional unit normals and RGB colours in [0, 1].

    Clouds are immutable; operations return new clouds.
    """

    __slots__ = ('points', 'normals', 'colors')

    def __init__(
        self,
        points: 'npt.ArrayLike',
        normals: 'Optional[npt.ArrayLike]' = None,
        colors: 'Optional[npt.ArrayLike]' = None,
    ) -> None:
        self.points = _readonly(_as_rows(points, 'points'))

        self.normals: Optional[FloatArray] = None
        if normals is not None:
            normal_rows = _as_rows(normals, 'normals')
            if len(normal_rows) != len(self.points):
                raise ValueError("Got {} normals for {} points".format(
                    len(normal_rows),
                    len(self.points),
                ))
            norms = np.linalg.norm(normal_rows, axis=1)
            if np.any(np.abs(norms - 1) > NORMAL_TOLERANCE):
                raise ValueError("Normals must have unit length")
            self.normals = _readonly(normal_rows)

        self.colors: Optional[FloatArray] = None
        if colors is not None:
            color_rows = _as_rows(colors, 'colors')
            if len(color_rows) != len(self.points):
                raise ValueError("Got {} colours for {} points".format(
                    len(color_rows),
                    len(self.points),
                ))
            if np.any(color_rows < 0) or np.any(color_rows > 1):
                raise ValueError("Colours must lie within [0, 1]")
            self.colors = _readonly(color_rows)

    @classmethod
    def empty(cls) -> 'PointCloud':
        return cls(np.zeros((0, 3)))

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return 'PointCloud({} points, normals={}, colors={})'.format(
            len(self),
            self.normals is not None,
            self.colors is not None,
        )

    def select(self, indices: 'npt.ArrayLike') -> 'PointCloud':
        """Sub-cloud of the given indices (or boolean mask), in that order."""
        index = np.asarray(indices)
        return PointCloud(
            self.points[index],
            None if self.normals is None else self.normals[index],
            None if self.colors is None else self.colors[index],
        )

    def transformed(self, pose: Pose) -> 'PointCloud':
        return PointCloud(
            pose.apply(self.points),
            None if self.normals is None else unit_rows(pose.apply_vectors(self.normals)),
            self.colors,
        )


def concatenate(clouds: Sequence[PointCloud]) -> PointCloud:
    """
    Join clouds end to end. Normals and colours survive only when every
    non-empty input carries them.
    """
    clouds = [x for x in clouds if len(x)]
    if not clouds:
        return PointCloud.empty()

    normals = None
    if all(x.normals is not None for x in clouds):
        normals = np.concatenate([x.normals for x in clouds if x.normals is not None])

    colors = None
    if all(x.colors is not None for x in clouds):
        colors = np.concatenate([x.colors for x in clouds if x.colors is not None])

    return PointCloud(
        np.concatenate([x.points for x in clouds]),
        normals,
        colors,
    )


def voxel_keys(points: FloatArray, voxel: float) -> npt.NDArray[np.int64]:
    keys: npt.NDArray[np.int64] = np.floor(points / voxel).astype(np.int64)
    return keys


def _group_means(inverse: IndexArray, count: int, values: FloatArray) -> FloatArray:
    sums = np.zeros((count, values.shape[1]))
    np.add.at(sums, inverse, values)
    members = np.bincount(inverse, minlength=count).astype(float)
    result: FloatArray = sums / members[:, np.newaxis]
    return result


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """
    Replace the points of each occupied voxel by their centroid.

    Normals and colours are averaged per voxel; averaged normals are
    renormalised, falling back to the voxel's first member's normal where the
    members cancel out. Output is ordered by voxel key.
    """
    if voxel <= 0:
        raise ValueError("Voxel size must be positive, got {!r}".format(voxel))
    if not len(cloud):
        return cloud

    keys = voxel_keys(cloud.points, voxel)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    count = len(first)

    points = _group_means(inverse, count, cloud.points)

    normals = None
    if cloud.normals is not None:
        summed = _group_means(inverse, count, cloud.normals)
        lengths = np.linalg.norm(summed, axis=1)
        normals = unit_rows(summed)
        cancelled = lengths < 1e-9
        normals[cancelled] = cloud.normals[first[cancelled]]

    colors = None
    if cloud.colors is not None:
        colors = np.clip(_group_means(inverse, count, cloud.colors), 0, 1)

    return PointCloud(points, normals, colors)


class NeighborIndex:
    """
    Nearest-neighbour index over a fixed set of points.

    Ties between equidistant points resolve to the lowest index.
    """

    def __init__(self, points: 'npt.ArrayLike') -> None:
        self.points = _as_rows(points, 'points')
        if not len(self.points):
            raise EmptyTarget("Cannot index an empty point set")
        self._tree = cKDTree(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def nearest(self, query: 'npt.ArrayLike') -> Tuple[int, float]:
        point = np.asarray(query, dtype=float).reshape(3)
        distance, _ = self._tree.query(point, k=1)
        # Gather every point at (numerically) that distance to apply the tie-break.
        radius = float(distance) * (1 + 1e-9) + 1e-12
        candidates = np.array(sorted(self._tree.query_ball_point(point, radius)))
        distances = np.linalg.norm(self.points[candidates] - point, axis=1)
        best = candidates[distances == distances.min()].min()
        return int(best), float(np.linalg.norm(self.points[best] - point))

    def query(
        self,
        queries: 'npt.ArrayLike',
        max_distance: float = np.inf,
    ) -> Tuple[FloatArray, IndexArray]:
        """
        Batched lookup: distances and indices of each query's nearest point.

        Queries with no point within `max_distance` get an infinite distance
        and the index ``len(self)``.
        """
        rows = _as_rows(queries, 'queries')
        if not len(rows):
            return np.zeros(0), np.zeros(0, dtype=np.int64)
        distances, indices = self._tree.query(rows, k=1, distance_upper_bound=max_distance)
        return np.asarray(distances, dtype=float), np.asarray(indices, dtype=np.int64)


def nearest_neighbor(query: 'npt.ArrayLike', target: PointCloud) -> Tuple[int, float]:
    """Index of and distance to the point of `target` closest to `query`."""
    if not len(target):
        raise EmptyTarget("Nearest-neighbour query against an empty cloud")
    return NeighborIndex(target.points).nearest(query)
