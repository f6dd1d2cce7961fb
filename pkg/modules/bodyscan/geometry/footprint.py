"""
Utilities for working with flat shapes on the floor plane.
"""

import math
from typing import Tuple

import numpy as np

from .pose import FloatArray

Point = Tuple[float, float]


class Rectangle:
    """
    An axis-aligned rectangle on the floor (metres).

    Used for the couch footprint and for navigable regions, primarily for
    containment and overlap checks against robot footprints.
    """

    def __init__(self, x_min: float, y_min: float, x_max: float, y_max: float) -> None:
        if x_max < x_min or y_max < y_min:
            raise ValueError("Rectangle corners out of order: {!r}".format(
                (x_min, y_min, x_max, y_max),
            ))
        self.corners = ((float(x_min), float(y_min)), (float(x_max), float(y_max)))

    @classmethod
    def centred(cls, length: float, width: float) -> 'Rectangle':
        return cls(-length / 2, -width / 2, length / 2, width / 2)

    @property
    def x_min(self) -> float:
        return self.corners[0][0]

    @property
    def y_min(self) -> float:
        return self.corners[0][1]

    @property
    def x_max(self) -> float:
        return self.corners[1][0]

    @property
    def y_max(self) -> float:
        return self.corners[1][1]

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def expanded(self, margin: float) -> 'Rectangle':
        return Rectangle(
            self.x_min - margin,
            self.y_min - margin,
            self.x_max + margin,
            self.y_max + margin,
        )

    def contains(self, other: 'Rectangle') -> bool:
        return (
            self.x_min <= other.x_min and other.x_max <= self.x_max and
            self.y_min <= other.y_min and other.y_max <= self.y_max
        )

    def contains_points(self, points: FloatArray, tolerance: float = 1e-9) -> bool:
        xs, ys = points[:, 0], points[:, 1]
        return bool(np.all(
            (xs >= self.x_min - tolerance) & (xs <= self.x_max + tolerance) &
            (ys >= self.y_min - tolerance) & (ys <= self.y_max + tolerance),
        ))

    def overlaps(self, other: 'Rectangle') -> bool:
        """Interiors intersect; touching edges do not count."""
        return (
            self.x_min < other.x_max and other.x_min < self.x_max and
            self.y_min < other.y_max and other.y_min < self.y_max
        )

    def distance_to(self, x: float, y: float) -> float:
        """Distance from a floor point to the rectangle (0 inside)."""
        dx = max(self.x_min - x, 0., x - self.x_max)
        dy = max(self.y_min - y, 0., y - self.y_max)
        return math.hypot(dx, dy)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rectangle):
            return NotImplemented

        return self.corners == other.corners

    def __hash__(self) -> int:
        return hash(self.corners)

    def __repr__(self) -> str:
        return 'Rectangle({!r}, {!r}, {!r}, {!r})'.format(
            self.x_min,
            self.y_min,
            self.x_max,
            self.y_max,
        )


def footprint_corners(
    x: float,
    y: float,
    heading: float,
    width: float,
    depth: float,
) -> FloatArray:
    """
    Corners of a rectangular footprint centred on (x, y), its depth running
    along the heading. Returned counter-clockwise, shape (4, 2).
    """
    forward = np.array((math.cos(heading), math.sin(heading)))
    left = np.array((-forward[1], forward[0]))
    centre = np.array((x, y))
    half_depth = forward * depth / 2
    half_width = left * width / 2
    return np.array((
        centre - half_depth - half_width,
        centre + half_depth - half_width,
        centre + half_depth + half_width,
        centre - half_depth + half_width,
    ))


def polygon_overlaps_rectangle(
    polygon: FloatArray,
    rectangle: Rectangle,
    tolerance: float = 1e-9,
) -> bool:
    """
    Separating-axis test between a convex polygon and a rectangle. Shapes
    which only touch (within `tolerance`) do not overlap.
    """
    box = np.array((
        (rectangle.x_min, rectangle.y_min),
        (rectangle.x_max, rectangle.y_min),
        (rectangle.x_max, rectangle.y_max),
        (rectangle.x_min, rectangle.y_max),
    ))

    edges = np.concatenate((
        np.roll(polygon, -1, axis=0) - polygon,
        np.array(((1., 0.), (0., 1.))),
    ))
    for edge in edges:
        axis = np.array((-edge[1], edge[0]))
        polygon_span = polygon @ axis
        box_span = box @ axis
        if (
            polygon_span.max() <= box_span.min() + tolerance or
            box_span.max() <= polygon_span.min() + tolerance
        ):
            return False
    return True
