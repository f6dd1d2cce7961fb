"""
Navigable floor around the couch.
"""

from typing import FrozenSet, NamedTuple

from ..bodies import CouchSpec
from ..geometry import Rectangle, FloatArray

KINDS = ('full', 'narrow', 'one_side')
SIDES = ('left', 'right', 'head', 'foot')

# Default room margin around the couch for the unconstrained workspace (m).
FULL_MARGIN = 3.0

# Default free floor on each side of the couch in a narrow room (m).
NARROW_CORRIDOR = 0.8


class WorkspaceSpec(NamedTuple):
    kind: str
    free_region: Rectangle
    blocked_sides: FrozenSet[str] = frozenset()

    def admits(self, polygon: FloatArray) -> bool:
        """Whether a floor polygon (e.g. a base footprint) lies on free floor."""
        return self.free_region.contains_points(polygon)


def _without_side(region: Rectangle, couch: CouchSpec, side: str) -> Rectangle:
    # Side walls follow the couch centreline; head and foot walls stand at
    # the couch ends.
    if side == 'right':
        return Rectangle(region.x_min, 0., region.x_max, region.y_max)
    if side == 'left':
        return Rectangle(region.x_min, region.y_min, region.x_max, 0.)
    if side == 'head':
        return Rectangle(region.x_min, region.y_min, couch.length / 2, region.y_max)
    return Rectangle(-couch.length / 2, region.y_min, region.x_max, region.y_max)


def make_workspace(
    kind: str,
    couch: CouchSpec,
    corridor: float = NARROW_CORRIDOR,
    margin: float = FULL_MARGIN,
    blocked_side: str = 'right',
) -> WorkspaceSpec:
    """
    Build one of the standard room layouts:

    * ``full``: open floor `margin` wide around the couch,
    * ``narrow``: a corridor of `corridor` on every side,
    * ``one_side``: open floor, with `blocked_side` of the couch against a wall.
    """
    if kind not in KINDS:
        raise ValueError("Unknown workspace kind {!r}, expected one of {}".format(kind, KINDS))
    if blocked_side not in SIDES:
        raise ValueError("Unknown couch side {!r}, expected one of {}".format(
            blocked_side,
            SIDES,
        ))

    footprint = couch.footprint()
    if kind == 'narrow':
        return WorkspaceSpec(kind, footprint.expanded(corridor))

    region = footprint.expanded(margin)
    if kind == 'one_side':
        return WorkspaceSpec(
            kind,
            _without_side(region, couch, blocked_side),
            frozenset((blocked_side,)),
        )
    return WorkspaceSpec(kind, region)
