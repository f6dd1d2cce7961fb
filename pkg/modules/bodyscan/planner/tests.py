#!/usr/bin/env python

import math
import heapq
import unittest
import itertools
from typing import Set, Dict, List, Tuple, Optional, Sequence

import numpy as np

from ..robot import BasePose, ArmConfig, default_robot_params
from .greedy import PlanStop, ScanPlan, greedy_select
from .output import format_plan, gains_table, estimate_plan_time
from ..bodies import CouchSpec
from ..cspace import ConfigRecord, make_workspace, ConfigDictionary
from ..errors import Unreachable, EmptyDictionary
from ..geometry import Cell, Pose, OccupancyGrid
from .navigation import (
    grid_path,
    neighbours,
    path_length,
    plan_base_path,
    attach_base_paths,
    build_occupancy_grid,
)


def toy_dictionary(
    visible_sets: Sequence[Sequence[int]],
    n_samples: int,
    base_of: Optional[Sequence[int]] = None,
) -> ConfigDictionary:
    if base_of is None:
        base_of = [0] * len(visible_sets)
    bases = tuple(BasePose(float(x), 0., 0.) for x in range(max(base_of) + 1))
    records = tuple(
        ConfigRecord(
            base=bases[base],
            arm=ArmConfig.zero(),
            camera=Pose.identity(),
            visible=np.array(sorted(visible), dtype=np.int64),
        )
        for visible, base in zip(visible_sets, base_of)
    )
    return ConfigDictionary(
        bases=bases,
        records=records,
        base_of=tuple(base_of),
        model_resolution=0.1,
        n_samples=n_samples,
        analysis_time_per_base=0.,
        params_hash='toy',
    )


def random_instance(rng: np.random.Generator) -> ConfigDictionary:
    count = int(rng.integers(4, 13))
    n_samples = int(rng.integers(10, 31))
    visible_sets = [
        rng.choice(n_samples, size=int(rng.integers(1, 9)), replace=False)
        for _ in range(count)
    ]
    base_of = sorted(int(x) for x in rng.integers(0, 4, size=count))
    # Renumber so that every base has at least one record.
    renumber = {base: index for index, base in enumerate(sorted(set(base_of)))}
    return toy_dictionary(visible_sets, n_samples, [renumber[x] for x in base_of])


def best_budgeted_coverage(
    dictionary: ConfigDictionary,
    max_bases: int,
    max_views: int,
) -> int:
    best = 0
    records = range(len(dictionary.records))
    for size in range(1, max_bases * max_views + 1):
        for subset in itertools.combinations(records, size):
            per_base: Dict[int, int] = {}
            for index in subset:
                base = dictionary.base_of[index]
                per_base[base] = per_base.get(base, 0) + 1
            if len(per_base) > max_bases or max(per_base.values()) > max_views:
                continue
            union: Set[int] = set()
            for index in subset:
                union.update(dictionary.records[index].visible.tolist())
            best = max(best, len(union))
    return best


def selected(plan: ScanPlan) -> List[int]:
    return [index for stop in plan.stops for index in stop.record_indices]


class GreedySelectTests(unittest.TestCase):
    def test_hand_traced_order(self) -> None:
        dictionary = toy_dictionary([[0, 1, 2], [2, 3], [4]], 5)

        plan = greedy_select(dictionary, max_bases=1, max_views_per_base=5)

        self.assertEqual([0, 1, 2], selected(plan))
        self.assertEqual((3, 1, 1), plan.expected_new_points_per_view)
        self.assertAlmostEqual(100., plan.expected_coverage)

    def test_everything_already_seen(self) -> None:
        dictionary = toy_dictionary([[0, 1, 2], [2, 3], [4]], 5)

        plan = greedy_select(dictionary, already_seen=np.arange(5))

        self.assertEqual((), plan.stops)
        self.assertAlmostEqual(100., plan.expected_coverage)

    def test_already_seen_counts_towards_coverage(self) -> None:
        dictionary = toy_dictionary([[0, 1], [2, 3]], 8)
        plan = greedy_select(dictionary, already_seen=np.array([6, 7]))
        self.assertAlmostEqual(75., plan.expected_coverage)

    def test_empty_dictionary(self) -> None:
        dictionary = toy_dictionary([[0]], 1)._replace(records=(), base_of=())
        with self.assertRaises(EmptyDictionary):
            greedy_select(dictionary)

    def test_rejects_zero_budget(self) -> None:
        with self.assertRaises(ValueError):
            greedy_select(toy_dictionary([[0]], 1), max_bases=0)

    def test_arm_before_base(self) -> None:
        # The second base offers the larger view but the first still adds.
        dictionary = toy_dictionary([[0, 1, 2, 3], [4], [5, 6, 7]], 8, [0, 0, 1])
        plan = greedy_select(dictionary, max_bases=2, max_views_per_base=5)
        self.assertEqual([0, 1, 2], selected(plan))
        self.assertEqual([0, 1], [x.base_index for x in plan.stops])

    def test_view_budget_opens_new_stop(self) -> None:
        dictionary = toy_dictionary([[0, 1, 2], [3], [4], [5, 6]], 7, [0, 0, 0, 1])
        plan = greedy_select(dictionary, max_bases=2, max_views_per_base=2)
        self.assertEqual([(0, 1), (3,)], [x.record_indices for x in plan.stops])

    def test_within_factor_of_optimum(self) -> None:
        rng = np.random.default_rng(7)
        bound = 1 - 1 / math.e
        for instance in range(50):
            dictionary = random_instance(rng)
            plan = greedy_select(dictionary, max_bases=3, max_views_per_base=2)
            optimum = best_budgeted_coverage(dictionary, 3, 2)
            with self.subTest(instance=instance):
                self.assertGreaterEqual(len(plan.covered()), bound * optimum)

    def test_plan_properties(self) -> None:
        rng = np.random.default_rng(8)
        for instance in range(30):
            dictionary = random_instance(rng)
            plan = greedy_select(dictionary, max_bases=3, max_views_per_base=2)
            with self.subTest(instance=instance):
                self.assertLessEqual(len(plan.stops), 3)
                for stop in plan.stops:
                    self.assertLessEqual(len(stop.views), 2)
                    self.assertEqual(sorted(stop.gains, reverse=True), list(stop.gains))
                    self.assertGreaterEqual(min(stop.gains), 1)

                openings = [x.gains[0] for x in plan.stops]
                self.assertEqual(sorted(openings, reverse=True), openings)

                covered = set(plan.covered().tolist())
                self.assertAlmostEqual(
                    100. * len(covered) / dictionary.n_samples,
                    plan.expected_coverage,
                )

                views = selected(plan)
                for dropped in views:
                    remaining: Set[int] = set()
                    for index in views:
                        if index != dropped:
                            remaining.update(dictionary.records[index].visible.tolist())
                    self.assertLess(len(remaining), len(covered))

    def test_coverage_grows_with_base_budget(self) -> None:
        rng = np.random.default_rng(9)
        for instance in range(20):
            dictionary = random_instance(rng)
            coverages = [
                greedy_select(dictionary, max_bases=n, max_views_per_base=2).expected_coverage
                for n in (1, 2, 3, 4)
            ]
            with self.subTest(instance=instance):
                self.assertEqual(sorted(coverages), coverages)


def dijkstra_cost(grid: OccupancyGrid, start: Cell, goal: Cell) -> Optional[float]:
    costs = {start: 0.}
    frontier = [(0., start)]
    while frontier:
        cost, cell = heapq.heappop(frontier)
        if cell == goal:
            return cost
        if cost > costs[cell]:
            continue
        for target, step in neighbours(grid, cell):
            if cost + step < costs.get(target, math.inf):
                costs[target] = cost + step
                heapq.heappush(frontier, (cost + step, target))
    return None


def random_grid(rng: np.random.Generator) -> Tuple[OccupancyGrid, Cell, Cell]:
    cells = rng.random((20, 20)) < 0.3
    cells[0, 0] = cells[19, 19] = False
    return OccupancyGrid((0., 0.), 0.1, cells), (0, 0), (19, 19)


class AStarTests(unittest.TestCase):
    def test_straight_line(self) -> None:
        grid = OccupancyGrid((0., 0.), 0.1, np.zeros((10, 10)))
        cells, cost = grid_path(grid, (0, 0), (0, 9))
        self.assertEqual([(0, j) for j in range(10)], cells)
        self.assertAlmostEqual(0.9, cost)

    def test_diagonal(self) -> None:
        grid = OccupancyGrid((0., 0.), 1., np.zeros((5, 5)))
        cells, cost = grid_path(grid, (0, 0), (4, 4))
        self.assertEqual(5, len(cells))
        self.assertAlmostEqual(4 * math.sqrt(2), cost)

    def test_no_corner_cutting(self) -> None:
        cells = np.zeros((2, 2), dtype=bool)
        cells[0, 1] = cells[1, 0] = True
        grid = OccupancyGrid((0., 0.), 1., cells)
        with self.assertRaises(Unreachable):
            grid_path(grid, (0, 0), (1, 1))

    def test_start_walled_in(self) -> None:
        cells = np.zeros((10, 10), dtype=bool)
        cells[4:7, 4:7] = True
        cells[5, 5] = False
        grid = OccupancyGrid((0., 0.), 0.1, cells)
        with self.assertRaises(Unreachable):
            grid_path(grid, (5, 5), (0, 0))

    def test_blocked_endpoint(self) -> None:
        cells = np.zeros((5, 5), dtype=bool)
        cells[4, 4] = True
        with self.assertRaises(Unreachable):
            grid_path(OccupancyGrid((0., 0.), 0.1, cells), (0, 0), (4, 4))

    def test_matches_dijkstra(self) -> None:
        rng = np.random.default_rng(30)
        solved = 0
        for instance in range(50):
            grid, start, goal = random_grid(rng)
            expected = dijkstra_cost(grid, start, goal)
            with self.subTest(instance=instance):
                if expected is None:
                    with self.assertRaises(Unreachable):
                        grid_path(grid, start, goal)
                    continue
                solved += 1
                cells, cost = grid_path(grid, start, goal)
                self.assertAlmostEqual(expected, cost, places=9)
                self.assertEqual((start, goal), (cells[0], cells[-1]))
                self.assertTrue(all(grid.is_free(x) for x in cells))
        self.assertGreater(solved, 0)

    def test_heuristic_scale_keeps_cost(self) -> None:
        rng = np.random.default_rng(31)
        for instance in range(20):
            grid, start, goal = random_grid(rng)
            if dijkstra_cost(grid, start, goal) is None:
                continue
            _, reference = grid_path(grid, start, goal)
            for scale in (0.25, 0.5, 1.):
                with self.subTest(instance=instance, scale=scale):
                    _, cost = grid_path(grid, start, goal, heuristic_scale=scale)
                    self.assertAlmostEqual(reference, cost, places=9)


class BaseRouteTests(unittest.TestCase):
    def setUp(self) -> None:
        self.couch = CouchSpec()
        self.params = default_robot_params()
        workspace = make_workspace('full', self.couch)
        self.grid = build_occupancy_grid(self.couch, workspace, self.params)

    def test_couch_is_blocked(self) -> None:
        self.assertFalse(self.grid.is_free(self.grid.world_to_cell(0., 0.)))
        self.assertTrue(self.grid.is_free(self.grid.world_to_cell(0., 1.5)))

    def test_route_around_couch(self) -> None:
        left = BasePose(0., self.couch.width / 2 + 0.55, -math.pi / 2)
        right = BasePose(0., -(self.couch.width / 2 + 0.55), math.pi / 2)

        waypoints = plan_base_path(left, right, self.grid)

        self.assertGreater(path_length(waypoints), 2 * (self.couch.width / 2 + 0.55))
        inflated = self.couch.footprint().expanded(self.params.footprint_radius())
        for x, y in waypoints:
            self.assertFalse(
                inflated.x_min < x < inflated.x_max and inflated.y_min < y < inflated.y_max,
                "Waypoint {} crosses the couch".format((x, y)),
            )

    def test_stop_next_to_couch_is_snapped(self) -> None:
        close = BasePose(0., self.couch.width / 2 + 0.3, -math.pi / 2)
        far = BasePose(2., 1.5, 0.)
        waypoints = plan_base_path(close, far, self.grid)
        self.assertTrue(self.grid.is_free(self.grid.world_to_cell(*waypoints[0])))

    def test_attach_paths(self) -> None:
        dictionary = toy_dictionary([[0], [1], [2]], 3, [0, 1, 2])._replace(bases=(
            BasePose(0., 1.0, -math.pi / 2),
            BasePose(1.6, 0., math.pi),
            BasePose(0., -1.0, math.pi / 2),
        ))
        plan = greedy_select(dictionary, max_bases=3, max_views_per_base=1)
        start = BasePose(-2., 2., 0.)

        self.assertEqual(2, len(attach_base_paths(plan, self.grid).base_paths))
        self.assertEqual(3, len(attach_base_paths(plan, self.grid, start).base_paths))


def plan_with(
    stop_views: Sequence[int],
    paths: Sequence[Sequence[Tuple[float, float]]],
) -> ScanPlan:
    record = ConfigRecord(
        BasePose(0, 0, 0),
        ArmConfig.zero(),
        Pose.identity(),
        np.zeros(0, np.int64),
    )
    stops = tuple(
        PlanStop(
            index,
            BasePose(0, 0, 0),
            tuple(range(count)),
            (record,) * count,
            (1,) * count,
        )
        for index, count in enumerate(stop_views)
    )
    return ScanPlan(
        stops=stops,
        base_paths=tuple(tuple(x) for x in paths),
        expected_coverage=0.,
        expected_new_points_per_view=(1,) * sum(stop_views),
        already_seen=np.zeros(0, np.int64),
        n_samples=10,
    )


class PlanOutputTests(unittest.TestCase):
    params = default_robot_params()

    def test_empty_plan_takes_no_time(self) -> None:
        self.assertEqual(0., estimate_plan_time(plan_with([], []), self.params))

    def test_single_stop(self) -> None:
        self.assertAlmostEqual(20., estimate_plan_time(plan_with([2], []), self.params))

    def test_travel_stops_and_views(self) -> None:
        plan = plan_with([3, 3, 3], [[(0., 0.), (1., 0.)], [(1., 0.), (1., 3.)]])
        self.assertAlmostEqual(125., estimate_plan_time(plan, self.params))

    def test_format_plan(self) -> None:
        dictionary = toy_dictionary([[0, 1], [2]], 3)
        text = format_plan(greedy_select(dictionary))
        lines = text.splitlines()
        self.assertEqual('stops: 1', lines[0])
        self.assertEqual('views: 2', lines[1])
        self.assertIn('expected_coverage: 100.00', lines)
        self.assertEqual(2, sum(1 for x in lines if x.startswith('  view ')))
        self.assertTrue(lines[-1].strip(), "Plan text should end with its last entry")

    def test_gains_table(self) -> None:
        dictionary = toy_dictionary([[0, 1], [2], [3]], 4)
        table = gains_table(greedy_select(dictionary))
        self.assertEqual([2, 1, 1], table['gain'].tolist())
        self.assertEqual([50., 75., 100.], table['cumulative_coverage'].tolist())
        self.assertEqual([1, 1, 1], table['stop'].tolist())


if __name__ == '__main__':
    unittest.main()
