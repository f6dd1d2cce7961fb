"""
Routes for the mobile base between scanning stops: A* over an occupancy
grid of the floor.
"""

import math
import heapq
import logging
from typing import Dict, List, Tuple, Optional, Sequence

import numpy as np

from ..robot import BasePose, RobotParams
from .greedy import ScanPlan, Waypoint
from ..bodies import CouchSpec
from ..cspace import WorkspaceSpec
from ..errors import Unreachable
from ..geometry import Cell, OccupancyGrid

LOGGER = logging.getLogger(__name__)

GRID_CELL = 0.1

# Neighbour offsets with their step lengths in cells.
_STEPS = tuple(
    ((di, dj), math.hypot(di, dj))
    for di in (-1, 0, 1)
    for dj in (-1, 0, 1)
    if di or dj
)


def build_occupancy_grid(
    couch: CouchSpec,
    workspace: WorkspaceSpec,
    params: RobotParams,
    cell_size: float = GRID_CELL,
) -> OccupancyGrid:
    """
    Grid over the workspace's free floor in which the couch footprint,
    grown by the base's floor radius, is blocked.
    """
    region = workspace.free_region
    rows = max(1, int(math.ceil(region.width / cell_size)))
    columns = max(1, int(math.ceil(region.height / cell_size)))
    grid = OccupancyGrid((region.x_min, region.y_min), cell_size, np.zeros((rows, columns)))

    inflated = couch.footprint().expanded(params.footprint_radius())
    xs, ys = grid.cell_centres()
    blocked = (
        (xs >= inflated.x_min) & (xs <= inflated.x_max) &
        (ys >= inflated.y_min) & (ys <= inflated.y_max)
    )
    return OccupancyGrid(grid.origin, cell_size, blocked)


def neighbours(grid: OccupancyGrid, cell: Cell) -> List[Tuple[Cell, float]]:
    """
    Free 8-connected neighbours with step lengths in metres. Diagonal moves
    need both cells they pass between to be free.
    """
    i, j = cell
    result = []
    for (di, dj), length in _STEPS:
        target = (i + di, j + dj)
        if not grid.is_free(target):
            continue
        if di and dj and not (grid.is_free((i + di, j)) and grid.is_free((i, j + dj))):
            continue
        result.append((target, length * grid.cell_size))
    return result


def grid_path(
    grid: OccupancyGrid,
    start: Cell,
    goal: Cell,
    heuristic_scale: float = 1.,
) -> Tuple[List[Cell], float]:
    """
    Shortest 8-connected path between two free cells as (cells, cost in m).

    The heuristic is the straight-line distance times `heuristic_scale`;
    scales within (0, 1] keep the result optimal.
    """
    for cell in (start, goal):
        if not grid.is_free(cell):
            raise Unreachable("Cell {!r} is blocked or off the grid".format(cell))

    goal_x, goal_y = grid.cell_to_world(goal)

    def heuristic(cell: Cell) -> float:
        x, y = grid.cell_to_world(cell)
        return heuristic_scale * math.hypot(goal_x - x, goal_y - y)

    costs: Dict[Cell, float] = {start: 0.}
    parents: Dict[Cell, Optional[Cell]] = {start: None}
    closed = set()
    counter = 0
    frontier = [(heuristic(start), counter, start)]

    while frontier:
        _, _, cell = heapq.heappop(frontier)
        if cell in closed:
            continue
        if cell == goal:
            break
        closed.add(cell)

        for target, step in neighbours(grid, cell):
            cost = costs[cell] + step
            if target in closed or cost >= costs.get(target, math.inf):
                continue
            costs[target] = cost
            parents[target] = cell
            counter += 1
            heapq.heappush(frontier, (cost + heuristic(target), counter, target))
    else:
        raise Unreachable("No path from {!r} to {!r}".format(start, goal))

    path = [goal]
    while path[-1] != start:
        parent = parents[path[-1]]
        assert parent is not None
        path.append(parent)
    return path[::-1], costs[goal]


def _free_cell(grid: OccupancyGrid, base: BasePose) -> Cell:
    cell = grid.world_to_cell(base.x, base.y)
    if grid.is_free(cell):
        return cell
    return grid.nearest_free_cell(cell)


def plan_base_path(start: BasePose, goal: BasePose, grid: OccupancyGrid) -> List[Waypoint]:
    """
    Cell-centre waypoints, endpoints included, of the shortest route between
    two base poses. Poses on blocked cells are snapped to the nearest free
    cell first.
    """
    cells, cost = grid_path(grid, _free_cell(grid, start), _free_cell(grid, goal))
    LOGGER.debug("Route of %.2f m over %d cells", cost, len(cells))
    return [grid.cell_to_world(x) for x in cells]


def path_length(waypoints: Sequence[Waypoint]) -> float:
    if len(waypoints) < 2:
        return 0.
    return float(np.sum(np.linalg.norm(np.diff(np.array(waypoints), axis=0), axis=1)))


def attach_base_paths(
    plan: ScanPlan,
    grid: OccupancyGrid,
    start: Optional[BasePose] = None,
) -> ScanPlan:
    """The plan with routes from `start` (if given) through every stop in order."""
    route = ([start] if start is not None else []) + [x.base for x in plan.stops]
    paths = tuple(
        tuple(plan_base_path(here, there, grid))
        for here, there in zip(route[:-1], route[1:])
    )
    return plan._replace(base_paths=paths)
