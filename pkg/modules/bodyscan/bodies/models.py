"""
The couch and the sampled body surfaces that rest on it.

World frame: floor at z = 0, couch top centred on the z axis at
``couch.height``, body axis along x with the head towards +x. The patient's
right side is y < 0.
"""

import math
from typing import Tuple, NamedTuple

import numpy as np
import numpy.typing as npt

from ..geometry import Rectangle, FloatArray, PointCloud, TriangleMesh

# Samples facing further down than this (normal z below its cosine) and
# lying close to the couch top are treated as the unobservable back.
UNDERSIDE_ANGLE = math.radians(80)

# How far above the couch top, in multiples of the model resolution, the
# underside rule applies.
UNDERSIDE_HEIGHT_FACTOR = 2.0


class CouchSpec(NamedTuple):
    length: float = 2.0
    width: float = 0.7
    height: float = 0.67  # top surface above the floor

    def validated(self) -> 'CouchSpec':
        for name, value in zip(self._fields, self):
            if not value > 0:
                raise ValueError("Couch {} must be positive, got {!r}".format(name, value))
        return self

    def footprint(self) -> Rectangle:
        return Rectangle.centred(self.length, self.width)

    def box(self) -> Tuple[FloatArray, FloatArray]:
        """Lower and upper corners of the couch as a solid block."""
        return (
            np.array((-self.length / 2, -self.width / 2, 0.)),
            np.array((self.length / 2, self.width / 2, self.height)),
        )


class SurfaceModel(NamedTuple):
    """
    A body surface: oriented samples for visibility and coverage, plus the
    mesh the samples were taken from for occlusion tests.
    """
    name: str
    samples: PointCloud
    mesh: TriangleMesh
    resolution: float
    couch: CouchSpec
    # Whether `strip_underside` has been applied. Coverage denominators
    # require stripped models.
    stripped: bool = False

    @property
    def normals(self) -> FloatArray:
        normals = self.samples.normals
        assert normals is not None, "Surface samples always carry normals"
        return normals

    def centre(self) -> FloatArray:
        result: FloatArray = self.samples.points.mean(axis=0)
        return result


def underside_mask(model: SurfaceModel) -> npt.NDArray[np.bool_]:
    heights = model.samples.points[:, 2]
    mask: npt.NDArray[np.bool_] = (
        (model.normals[:, 2] < math.cos(UNDERSIDE_ANGLE)) &
        (heights <= model.couch.height + UNDERSIDE_HEIGHT_FACTOR * model.resolution)
    )
    return mask


def strip_underside(model: SurfaceModel) -> SurfaceModel:
    """
    Remove the samples on the couch-contact side of the body, which no camera
    above the couch can observe. Retained samples are unchanged.
    """
    keep = ~underside_mask(model)
    return model._replace(
        samples=model.samples.select(np.flatnonzero(keep)),
        stripped=True,
    )
