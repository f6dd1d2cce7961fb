"""
Where the mobile base may stop around the couch.
"""

import math
import logging
from typing import List, Tuple, Callable, NamedTuple

from ..robot import BasePose, base_fits, RobotParams
from ..bodies import CouchSpec
from ..errors import NoCandidates
from .workspace import WorkspaceSpec

LOGGER = logging.getLogger(__name__)

Point = Tuple[float, float]


class AnalysisSettings(NamedTuple):
    # Distances from the couch edge to the base centre (m).
    standoffs: Tuple[float, ...] = (0.35, 0.55)
    # Spacing of bases along each ring (m).
    spacing: float = 0.25
    # Distance of each camera from the surface point it looks at (m).
    view_standoff: float = 0.6
    # View targets are spaced this many model resolutions apart.
    target_spacing_factor: float = 2.0
    workers: int = 1

    def validated(self) -> 'AnalysisSettings':
        if not self.standoffs or min(self.standoffs) <= 0:
            raise ValueError("Standoffs must be positive, got {!r}".format(self.standoffs))
        for name in ('spacing', 'view_standoff', 'target_spacing_factor'):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError("{} must be positive, got {!r}".format(name, value))
        if self.workers < 1:
            raise ValueError("Need at least one worker, got {!r}".format(self.workers))
        return self


def _ring_pieces(
    couch: CouchSpec,
    standoff: float,
) -> List[Tuple[float, Callable[[float], Point]]]:
    """
    The rounded rectangle `standoff` outside the couch footprint, as
    (length, point at fraction) pieces running anticlockwise from the foot
    end of the patient's right side.
    """
    half_length, half_width = couch.length / 2, couch.width / 2

    def straight(start: Point, end: Point) -> Callable[[float], Point]:
        return lambda f: (
            start[0] + f * (end[0] - start[0]),
            start[1] + f * (end[1] - start[1]),
        )

    def arc(centre: Point, start_angle: float) -> Callable[[float], Point]:
        def point(f: float) -> Point:
            angle = start_angle + f * math.pi / 2
            return (
                centre[0] + standoff * math.cos(angle),
                centre[1] + standoff * math.sin(angle),
            )
        return point

    quarter = math.pi * standoff / 2
    outer_width, outer_length = half_width + standoff, half_length + standoff
    return [
        (couch.length, straight((-half_length, -outer_width), (half_length, -outer_width))),
        (quarter, arc((half_length, -half_width), -math.pi / 2)),
        (couch.width, straight((outer_length, -half_width), (outer_length, half_width))),
        (quarter, arc((half_length, half_width), 0.)),
        (couch.length, straight((half_length, outer_width), (-half_length, outer_width))),
        (quarter, arc((-half_length, half_width), math.pi / 2)),
        (couch.width, straight((-outer_length, half_width), (-outer_length, -half_width))),
        (quarter, arc((-half_length, -half_width), math.pi)),
    ]


def ring_points(couch: CouchSpec, standoff: float, spacing: float) -> List[Point]:
    """Evenly spaced points around the couch at `standoff` from its edge."""
    pieces = _ring_pieces(couch, standoff)
    perimeter = sum(length for length, _ in pieces)
    count = max(4, int(round(perimeter / spacing)))

    points = []
    offset, piece_start = 0, 0.
    for index in range(count):
        position = (index + 0.5) * perimeter / count
        while position > piece_start + pieces[offset][0] and offset < len(pieces) - 1:
            piece_start += pieces[offset][0]
            offset += 1
        length, at = pieces[offset]
        points.append(at(min(1., (position - piece_start) / length)))
    return points


def facing_couch(couch: CouchSpec, x: float, y: float) -> BasePose:
    """A base at (x, y) turned towards the nearest point of the couch."""
    nearest_x = min(max(x, -couch.length / 2), couch.length / 2)
    nearest_y = min(max(y, -couch.width / 2), couch.width / 2)
    return BasePose(x, y, math.atan2(nearest_y - y, nearest_x - x))


def enumerate_base_candidates(
    couch: CouchSpec,
    workspace: WorkspaceSpec,
    params: RobotParams,
    settings: AnalysisSettings = AnalysisSettings(),
) -> List[BasePose]:
    """
    Base poses on rings around the couch, one ring per standoff, each facing
    the couch. Poses whose footprint leaves the free floor or touches the
    couch are dropped.
    """
    candidates = []
    for standoff in settings.standoffs:
        for x, y in ring_points(couch, standoff, settings.spacing):
            base = facing_couch(couch, x, y)
            if base_fits(params, base, couch, workspace):
                candidates.append(base)

    if not candidates:
        raise NoCandidates("No base position fits the {} workspace".format(workspace.kind))

    LOGGER.info("%d candidate base positions", len(candidates))
    return candidates
