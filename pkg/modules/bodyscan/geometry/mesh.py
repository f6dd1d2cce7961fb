"""
Triangle meshes and ray casting against them.
"""

from typing import List, Tuple, Optional, Sequence, NamedTuple

import numpy as np
import numpy.typing as npt

from .pose import Pose, FloatArray
from .clouds import unit_rows, IndexArray
from ..errors import EmptyMesh

# Minimum ray parameter accepted as a hit; keeps rays leaving a surface from
# hitting the triangle they start on.
RAY_EPSILON = 1e-6

# Triangles smaller than this (m²) are rejected on construction.
MIN_TRIANGLE_AREA = 1e-12

# Upper bound on (ray, triangle) pairs evaluated in one vectorised block.
_BLOCK_PAIRS = 200_000


class TriangleCluster(NamedTuple):
    """A spatially compact group of triangles with a bounding sphere."""
    centre: FloatArray
    radius: float
    triangles: IndexArray


class TriangleMesh:
    """
    An indexed triangle mesh. Immutable; degenerate triangles are rejected.

    Winding is counter-clockwise seen from outside, so face normals point out.
    """

    def __init__(self, vertices: 'npt.ArrayLike', triangles: 'npt.ArrayLike') -> None:
        vertex_rows = np.array(vertices, dtype=float).reshape(-1, 3)
        triangle_rows = np.array(triangles, dtype=np.int64).reshape(-1, 3)

        if not np.all(np.isfinite(vertex_rows)):
            raise ValueError("Mesh vertices must be finite")
        if len(triangle_rows) and (
            triangle_rows.min() < 0 or triangle_rows.max() >= len(vertex_rows)
        ):
            raise ValueError("Triangle indices must lie within the {} vertices".format(
                len(vertex_rows),
            ))

        v0, v1, v2 = (vertex_rows[triangle_rows[:, i]] for i in range(3))
        areas = 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
        degenerate = np.flatnonzero(areas <= MIN_TRIANGLE_AREA)
        if len(degenerate):
            raise ValueError("Degenerate triangles (area <= {}): {!r}".format(
                MIN_TRIANGLE_AREA,
                degenerate[:10].tolist(),
            ))

        vertex_rows.flags.writeable = False
        triangle_rows.flags.writeable = False
        self.vertices = vertex_rows
        self.triangles = triangle_rows
        self._clusters: Optional[List[TriangleCluster]] = None

    def __len__(self) -> int:
        return len(self.triangles)

    def __repr__(self) -> str:
        return 'TriangleMesh({} vertices, {} triangles)'.format(
            len(self.vertices),
            len(self.triangles),
        )

    def corners(self) -> Tuple[FloatArray, FloatArray, FloatArray]:
        return (
            self.vertices[self.triangles[:, 0]],
            self.vertices[self.triangles[:, 1]],
            self.vertices[self.triangles[:, 2]],
        )

    def areas(self) -> FloatArray:
        v0, v1, v2 = self.corners()
        result: FloatArray = 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
        return result

    def face_normals(self) -> FloatArray:
        v0, v1, v2 = self.corners()
        return unit_rows(np.cross(v1 - v0, v2 - v0))

    def centroids(self) -> FloatArray:
        v0, v1, v2 = self.corners()
        result: FloatArray = (v0 + v1 + v2) / 3
        return result

    def transformed(self, pose: Pose) -> 'TriangleMesh':
        return TriangleMesh(pose.apply(self.vertices), self.triangles)

    def clusters(self) -> List[TriangleCluster]:
        """
        Triangles bucketed on a coarse grid of their centroids, each bucket
        bounded by a sphere. Used to skip whole groups of triangles in
        occlusion queries.
        """
        if self._clusters is None:
            self._clusters = _build_clusters(self)
        return self._clusters


def merge_meshes(meshes: Sequence[TriangleMesh]) -> TriangleMesh:
    vertices = []
    triangles = []
    offset = 0
    for mesh in meshes:
        vertices.append(mesh.vertices)
        triangles.append(mesh.triangles + offset)
        offset += len(mesh.vertices)
    if not vertices:
        raise EmptyMesh("No meshes to merge")
    return TriangleMesh(np.concatenate(vertices), np.concatenate(triangles))


def _build_clusters(mesh: TriangleMesh, cells_per_axis: int = 8) -> List[TriangleCluster]:
    if not len(mesh):
        return []

    v0, v1, v2 = mesh.corners()
    centroids = (v0 + v1 + v2) / 3
    low = mesh.vertices.min(axis=0)
    extent = max(float((mesh.vertices.max(axis=0) - low).max()), 1e-9)
    cell = extent / cells_per_axis

    keys = np.floor((centroids - low) / cell).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)

    clusters = []
    for group in range(inverse.max() + 1):
        members = np.flatnonzero(inverse == group)
        corners = np.concatenate((v0[members], v1[members], v2[members]))
        centre = 0.5 * (corners.min(axis=0) + corners.max(axis=0))
        radius = float(np.linalg.norm(corners - centre, axis=1).max())
        clusters.append(TriangleCluster(centre, radius, members))
    return clusters


def intersect_rays(
    origins: FloatArray,
    directions: FloatArray,
    v0: FloatArray,
    v1: FloatArray,
    v2: FloatArray,
) -> FloatArray:
    """
    Möller–Trumbore intersection of every ray with every triangle.

    Returns an array of shape (rays, triangles) holding the ray parameter of
    each hit, or infinity for misses and hits closer than `RAY_EPSILON`.
    """
    edge1 = v1 - v0
    edge2 = v2 - v0

    pvec = np.cross(directions[:, np.newaxis, :], edge2[np.newaxis, :, :])
    det = np.einsum('tk,rtk->rt', edge1, pvec)
    parallel = np.abs(det) < 1e-12
    inv_det = 1.0 / np.where(parallel, 1.0, det)

    tvec = origins[:, np.newaxis, :] - v0[np.newaxis, :, :]
    u = np.einsum('rtk,rtk->rt', tvec, pvec) * inv_det

    qvec = np.cross(tvec, edge1[np.newaxis, :, :])
    v = np.einsum('rk,rtk->rt', directions, qvec) * inv_det
    t = np.einsum('tk,rtk->rt', edge2, qvec) * inv_det

    hit = (~parallel) & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > RAY_EPSILON)
    result: FloatArray = np.where(hit, t, np.inf)
    return result


def ray_mesh_intersect(
    origin: 'npt.ArrayLike',
    direction: 'npt.ArrayLike',
    mesh: TriangleMesh,
) -> Optional[Tuple[float, int]]:
    """
    The nearest hit of a ray with the mesh as ``(t, triangle index)``, or
    ``None``. `direction` must be unit length so that `t` is in metres.
    """
    ray_direction = np.asarray(direction, dtype=float).reshape(1, 3)
    if abs(np.linalg.norm(ray_direction) - 1) > 1e-6:
        raise ValueError("Ray direction must be unit length, got {!r}".format(direction))
    if not len(mesh):
        return None

    v0, v1, v2 = mesh.corners()
    hits = intersect_rays(
        np.asarray(origin, dtype=float).reshape(1, 3),
        ray_direction,
        v0,
        v1,
        v2,
    )[0]
    best = int(np.argmin(hits))
    if not np.isfinite(hits[best]):
        return None
    return float(hits[best]), best


def _segments_hit(
    starts: FloatArray,
    directions: FloatArray,
    lengths: FloatArray,
    limits: FloatArray,
    mesh: TriangleMesh,
) -> npt.NDArray[np.bool_]:
    # Segment i hits when a triangle lies strictly between its start and limits[i].
    hit = np.zeros(len(starts), dtype=bool)
    v0, v1, v2 = mesh.corners()
    for cluster in mesh.clusters():
        # Closest approach of each segment to the cluster's bounding sphere.
        along = np.clip(np.einsum('rk,rk->r', cluster.centre - starts, directions), 0, lengths)
        closest = starts + directions * along[:, np.newaxis]
        near = np.linalg.norm(closest - cluster.centre, axis=1) <= cluster.radius + 1e-9
        candidates = np.flatnonzero(near & ~hit & (limits > RAY_EPSILON))
        if not len(candidates):
            continue

        members = cluster.triangles
        block = max(1, _BLOCK_PAIRS // len(members))
        for begin in range(0, len(candidates), block):
            rays = candidates[begin:begin + block]
            hits = intersect_rays(
                starts[rays],
                directions[rays],
                v0[members],
                v1[members],
                v2[members],
            )
            hit[rays] |= np.any(hits < limits[rays, np.newaxis], axis=1)

    return hit


def segments_occluded(
    origin: 'npt.ArrayLike',
    targets: FloatArray,
    mesh: TriangleMesh,
    tolerance: float,
) -> npt.NDArray[np.bool_]:
    """
    For each target, whether the straight segment from `origin` hits any
    triangle more than `tolerance` before reaching the target.
    """
    start = np.asarray(origin, dtype=float).reshape(3)
    if not len(targets) or not len(mesh):
        return np.zeros(len(targets), dtype=bool)

    offsets = targets - start
    lengths = np.linalg.norm(offsets, axis=1)
    directions = offsets / np.maximum(lengths, 1e-12)[:, np.newaxis]
    starts = np.broadcast_to(start, offsets.shape)
    return _segments_hit(starts, directions, lengths, lengths - tolerance, mesh)


def segments_cross_mesh(
    starts: FloatArray,
    ends: FloatArray,
    mesh: TriangleMesh,
) -> npt.NDArray[np.bool_]:
    """For each segment from `starts[i]` to `ends[i]`, whether it passes through the mesh."""
    if not len(starts) or not len(mesh):
        return np.zeros(len(starts), dtype=bool)

    offsets = ends - starts
    lengths = np.linalg.norm(offsets, axis=1)
    directions = offsets / np.maximum(lengths, 1e-12)[:, np.newaxis]
    return _segments_hit(starts, directions, lengths, lengths, mesh)
