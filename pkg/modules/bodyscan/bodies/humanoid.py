"""
A simple supine humanoid built from ellipsoids, standing in for a scanned
average-adult surface.
"""

import math
import logging
from typing import Tuple, NamedTuple

import numpy as np
import numpy.typing as npt

from .models import CouchSpec, SurfaceModel
from .sampling import orient_outward, sample_mesh_surface
from ..geometry import FloatArray, concatenate, merge_meshes, TriangleMesh

LOGGER = logging.getLogger(__name__)

# Height the part layout below was drawn for (m).
REFERENCE_HEIGHT = 1.75

# Part centres sit this fraction of their vertical semi-axis above the couch
# top; the rest of each part is buried in the couch.
RESTING_FRACTION = 0.15

LATITUDES = 12
LONGITUDES = 24


class Ellipsoid(NamedTuple):
    name: str
    # Centre in the couch-top plane (x along the body, y to the patient's left).
    x: float
    y: float
    semi_axes: Tuple[float, float, float]

    def centre(self, couch_height: float) -> FloatArray:
        return np.array((
            self.x,
            self.y,
            couch_height + RESTING_FRACTION * self.semi_axes[2],
        ))

    def scaled(self, factor: float) -> 'Ellipsoid':
        return Ellipsoid(
            self.name,
            self.x * factor,
            self.y * factor,
            (
                self.semi_axes[0] * factor,
                self.semi_axes[1] * factor,
                self.semi_axes[2] * factor,
            ),
        )


HUMANOID_PARTS = (
    Ellipsoid('head', 0.76, 0., (0.11, 0.08, 0.17)),
    Ellipsoid('torso', 0.36, 0., (0.30, 0.18, 0.20)),
    Ellipsoid('pelvis', 0., 0., (0.15, 0.17, 0.17)),
    Ellipsoid('left_arm', 0.30, 0.26, (0.30, 0.05, 0.06)),
    Ellipsoid('right_arm', 0.30, -0.26, (0.30, 0.05, 0.06)),
    Ellipsoid('left_leg', -0.47, 0.09, (0.40, 0.075, 0.09)),
    Ellipsoid('right_leg', -0.47, -0.09, (0.40, 0.075, 0.09)),
)


def ellipsoid_mesh(centre: FloatArray, semi_axes: Tuple[float, float, float]) -> TriangleMesh:
    """A latitude/longitude triangulation with outward winding."""
    latitudes = np.linspace(-math.pi / 2, math.pi / 2, LATITUDES + 1)[1:-1]
    longitudes = np.linspace(0, 2 * math.pi, LONGITUDES, endpoint=False)
    grid_lat, grid_lon = np.meshgrid(latitudes, longitudes, indexing='ij')

    unit = np.column_stack((
        (np.cos(grid_lat) * np.cos(grid_lon)).ravel(),
        (np.cos(grid_lat) * np.sin(grid_lon)).ravel(),
        np.sin(grid_lat).ravel(),
    ))
    unit = np.concatenate((unit, [(0., 0., -1.), (0., 0., 1.)]))
    vertices = centre + unit * np.array(semi_axes)
    south, north = len(unit) - 2, len(unit) - 1

    def index(i: int, j: int) -> int:
        return i * LONGITUDES + j % LONGITUDES

    triangles = []
    for j in range(LONGITUDES):
        triangles.append((south, index(0, j), index(0, j + 1)))
        triangles.append((north, index(LATITUDES - 2, j), index(LATITUDES - 2, j + 1)))
        for i in range(LATITUDES - 2):
            a, b = index(i, j), index(i, j + 1)
            c, d = index(i + 1, j + 1), index(i + 1, j)
            triangles += [(a, b, c), (a, c, d)]

    return TriangleMesh(
        vertices,
        orient_outward(vertices, np.array(triangles, dtype=np.int64), centre),
    )


def _above(mesh: TriangleMesh, height: float) -> TriangleMesh:
    """Drop the triangles buried entirely below the couch top."""
    highest = mesh.vertices[mesh.triangles][:, :, 2].max(axis=1)
    return TriangleMesh(mesh.vertices, mesh.triangles[highest > height])


def _inside(
    points: FloatArray,
    centre: FloatArray,
    semi_axes: Tuple[float, float, float],
) -> npt.NDArray[np.bool_]:
    scaled = (points - centre) / np.array(semi_axes)
    inside: npt.NDArray[np.bool_] = np.einsum('ij,ij->i', scaled, scaled) < 1 - 1e-9
    return inside


def make_supine_humanoid(
    couch: CouchSpec,
    resolution: float,
    seed: int,
    height: float = REFERENCE_HEIGHT,
) -> SurfaceModel:
    """
    A supine humanoid lying head towards +x along the couch centreline.

    Each part is sampled on its own; samples buried inside another part or
    below the couch top are dropped, so the model only holds exposed skin.
    """
    couch = couch.validated()
    if not height > 0:
        raise ValueError("Body height must be positive, got {!r}".format(height))

    parts = [part.scaled(height / REFERENCE_HEIGHT) for part in HUMANOID_PARTS]
    centres = [part.centre(couch.height) for part in parts]
    meshes = [
        _above(ellipsoid_mesh(centre, part.semi_axes), couch.height)
        for part, centre in zip(parts, centres)
    ]

    exposed_samples = []
    for index, mesh in enumerate(meshes):
        samples = sample_mesh_surface(mesh, resolution, (seed, index))
        exposed = samples.points[:, 2] >= couch.height
        for other, (part, centre) in enumerate(zip(parts, centres)):
            if other != index:
                exposed &= ~_inside(samples.points, centre, part.semi_axes)
        LOGGER.debug(
            "Humanoid %s: kept %d of %d samples",
            parts[index].name,
            int(exposed.sum()),
            len(samples),
        )
        exposed_samples.append(samples.select(np.flatnonzero(exposed)))

    return SurfaceModel(
        name='humanoid',
        samples=concatenate(exposed_samples),
        mesh=merge_meshes(meshes),
        resolution=resolution,
        couch=couch,
    )
