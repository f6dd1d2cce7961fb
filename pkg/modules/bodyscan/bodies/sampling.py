"""
Resolution-controlled sampling of arbitrary triangle meshes.
"""

import math
import logging

import numpy as np
import numpy.typing as npt

from ..utils import Seed, make_rng
from .models import CouchSpec, SurfaceModel
from ..errors import EmptyMesh
from ..geometry import FloatArray, PointCloud, voxel_keys, TriangleMesh

LOGGER = logging.getLogger(__name__)

# Random draws per resolution cell of surface area, before thinning.
OVERSAMPLING = 20


def orient_outward(
    vertices: FloatArray,
    triangles: npt.NDArray[np.int64],
    interior: FloatArray,
) -> npt.NDArray[np.int64]:
    """
    Reorder the triangles of a convex shell so that each one winds
    counter-clockwise seen from outside, given a point strictly inside.
    """
    v0, v1, v2 = (vertices[triangles[:, i]] for i in range(3))
    normals = np.cross(v1 - v0, v2 - v0)
    centroids = (v0 + v1 + v2) / 3
    inward = np.einsum('ij,ij->i', normals, centroids - interior) < 0
    result = triangles.copy()
    result[inward] = result[inward][:, ::-1]
    return result


def _outward_sign(mesh: TriangleMesh) -> float:
    """
    +1 if the mesh's face normals point away from its interior on balance,
    -1 otherwise. Flat meshes are oriented so that their normals face up.
    """
    areas = mesh.areas()
    normals = mesh.face_normals()
    centroids = mesh.centroids()
    middle = (areas[:, np.newaxis] * centroids).sum(axis=0) / areas.sum()

    score = float(np.sum(areas * np.einsum('ij,ij->i', normals, centroids - middle)))
    extent = float(np.ptp(mesh.vertices, axis=0).max())
    if abs(score) > 1e-9 * areas.sum() * extent:
        return 1. if score > 0 else -1.
    return 1. if float(np.sum(areas * normals[:, 2])) >= 0 else -1.


def sample_mesh_surface(mesh: TriangleMesh, resolution: float, seed: Seed) -> PointCloud:
    """
    Near-uniform surface samples about `resolution` apart.

    Points are drawn at random weighted by triangle area, then thinned to the
    first draw in each `resolution`-sized voxel, so every sample lies exactly
    on the mesh. Normals are the triangle normals, oriented outwards.
    """
    if not len(mesh):
        raise EmptyMesh("Cannot sample a mesh without triangles")
    if not resolution > 0:
        raise ValueError("Resolution must be positive, got {!r}".format(resolution))

    areas = mesh.areas()
    total_area = float(areas.sum())
    count = max(1, math.ceil(OVERSAMPLING * total_area / resolution ** 2))

    rng = make_rng(seed)
    chosen = rng.choice(len(mesh), size=count, p=areas / total_area)
    u, v = rng.uniform(size=(2, count))
    outside = u + v > 1
    u[outside], v[outside] = 1 - u[outside], 1 - v[outside]

    v0, v1, v2 = (corner[chosen] for corner in mesh.corners())
    points = v0 + u[:, np.newaxis] * (v1 - v0) + v[:, np.newaxis] * (v2 - v0)

    _, first = np.unique(voxel_keys(points, resolution), axis=0, return_index=True)
    first = np.sort(first)

    normals = _outward_sign(mesh) * mesh.face_normals()[chosen[first]]
    LOGGER.debug(
        "Sampled %d points over %.3f m² at %.3f m resolution",
        len(first),
        total_area,
        resolution,
    )
    return PointCloud(points[first], normals)


def model_from_mesh(
    name: str,
    mesh: TriangleMesh,
    couch: CouchSpec,
    resolution: float,
    seed: Seed,
) -> SurfaceModel:
    """Wrap an arbitrary body mesh, already placed on the couch, as a model."""
    return SurfaceModel(
        name=name,
        samples=sample_mesh_surface(mesh, resolution, seed),
        mesh=mesh,
        resolution=resolution,
        couch=couch.validated(),
    )
