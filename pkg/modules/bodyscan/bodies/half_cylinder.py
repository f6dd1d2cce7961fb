"""
The half-cylinder phantom: flat side down on the couch, axis along its length.
"""

import math
from typing import List, Tuple

import numpy as np

from .models import CouchSpec, SurfaceModel
from ..errors import ResolutionTooCoarse
from .sampling import orient_outward
from ..geometry import FloatArray, PointCloud, TriangleMesh

# Flat facets approximating the curved surface.
FACETS = 48

# Longest mesh segment along the axis (m).
SEGMENT_LENGTH = 0.1


def half_cylinder_mesh(length: float, radius: float, height: float) -> TriangleMesh:
    """A closed mesh: curved facets, two semicircular end caps and the base."""
    segments = max(1, math.ceil(length / SEGMENT_LENGTH))
    xs = np.linspace(-length / 2, length / 2, segments + 1)
    angles = np.linspace(0, math.pi, FACETS + 1)

    ring = np.column_stack((radius * np.cos(angles), height + radius * np.sin(angles)))
    vertices = [(x, y, z) for x in xs for y, z in ring]
    first_centre = len(vertices)
    vertices += [(xs[0], 0., height), (xs[-1], 0., height)]

    def index(k: int, j: int) -> int:
        return k * (FACETS + 1) + j

    triangles: List[Tuple[int, int, int]] = []
    for k in range(segments):
        for j in range(FACETS):
            a, b = index(k, j), index(k + 1, j)
            c, d = index(k + 1, j + 1), index(k, j + 1)
            triangles += [(a, b, c), (a, c, d)]
        # Base, joining the two straight edges of the shell.
        a, b = index(k, 0), index(k + 1, 0)
        c, d = index(k + 1, FACETS), index(k, FACETS)
        triangles += [(a, b, c), (a, c, d)]

    for centre, k in ((first_centre, 0), (first_centre + 1, segments)):
        triangles += [(centre, index(k, j), index(k, j + 1)) for j in range(FACETS)]

    vertex_array = np.array(vertices)
    interior = np.array((0., 0., height + 0.3 * radius))
    return TriangleMesh(
        vertex_array,
        orient_outward(vertex_array, np.array(triangles, dtype=np.int64), interior),
    )


def _curved_samples(
    length: float,
    radius: float,
    height: float,
    resolution: float,
) -> Tuple[FloatArray, FloatArray]:
    along = max(1, round(length / resolution))
    around = max(1, round(math.pi * radius / resolution))
    xs = -length / 2 + (np.arange(along) + 0.5) * length / along
    thetas = (np.arange(around) + 0.5) * math.pi / around

    # Project each parametric sample radially onto the flat facet under it.
    facet_width = math.pi / FACETS
    facet = np.minimum(np.floor(thetas / facet_width), FACETS - 1)
    facet_centre = (facet + 0.5) * facet_width
    rho = radius * math.cos(facet_width / 2) / np.cos(thetas - facet_centre)

    grid_x, grid_theta = np.meshgrid(xs, thetas, indexing='ij')
    grid_rho = np.broadcast_to(rho, grid_theta.shape)
    points = np.column_stack((
        grid_x.ravel(),
        (grid_rho * np.cos(grid_theta)).ravel(),
        height + (grid_rho * np.sin(grid_theta)).ravel(),
    ))

    facet_normals = np.column_stack((
        np.zeros(around),
        np.cos(facet_centre),
        np.sin(facet_centre),
    ))
    normals = np.tile(facet_normals, (along, 1))
    return points, normals


def _cap_samples(radius: float, height: float, resolution: float) -> FloatArray:
    """Concentric half-rings of (y, z) samples filling one end cap."""
    rings = max(1, round(radius / resolution))
    samples = []
    for k in range(rings):
        rho = (k + 0.5) * radius / rings
        count = max(1, round(math.pi * rho / resolution))
        thetas = (np.arange(count) + 0.5) * math.pi / count
        samples.append(np.column_stack((rho * np.cos(thetas), height + rho * np.sin(thetas))))
    return np.concatenate(samples)


def make_half_cylinder(
    length: float,
    radius: float,
    couch: CouchSpec,
    resolution: float,
) -> SurfaceModel:
    """
    A half-cylinder lying on the couch, sampled on a regular parametric grid
    spaced about `resolution` apart over its curved surface and end caps.
    """
    couch = couch.validated()
    for name, value in (('length', length), ('radius', radius), ('resolution', resolution)):
        if not value > 0:
            raise ValueError("Half-cylinder {} must be positive, got {!r}".format(name, value))
    if resolution > radius:
        raise ResolutionTooCoarse(
            "Resolution {!r} is coarser than the radius {!r}".format(resolution, radius),
        )

    height = couch.height
    curved_points, curved_normals = _curved_samples(length, radius, height, resolution)

    cap = _cap_samples(radius, height, resolution)
    cap_points = []
    cap_normals = []
    for sign in (-1, 1):
        cap_points.append(np.column_stack((np.full(len(cap), sign * length / 2), cap)))
        cap_normals.append(np.tile((sign, 0., 0.), (len(cap), 1)))

    samples = PointCloud(
        np.concatenate([curved_points] + cap_points),
        np.concatenate([curved_normals] + cap_normals),
    )
    return SurfaceModel(
        name='half_cylinder',
        samples=samples,
        mesh=half_cylinder_mesh(length, radius, height),
        resolution=resolution,
        couch=couch,
    )
