#!/usr/bin/env python

import math
import tempfile
import unittest
from typing import List
from pathlib import Path

import numpy as np

from ..robot import BasePose, RobotParams, forward_kinematics, default_robot_params
from ..bodies import CouchSpec, SurfaceModel, make_half_cylinder
from ..errors import NoKnee, NoCandidates, DictionaryMismatch
from ..sensor import CameraModel, visible_points
from .kneedle import find_knee, select_resolution_kneedle
from .storage import load_dictionary, save_dictionary
from .analysis import (
    ConfigRecord,
    build_dictionary,
    ConfigDictionary,
    analyze_base_position,
)
from ..geometry import Rectangle
from .workspace import WorkspaceSpec, make_workspace
from .candidates import (
    ring_points,
    facing_couch,
    AnalysisSettings,
    enumerate_base_candidates,
)

COUCH = CouchSpec()
CAMERA = CameraModel()

# Base beside the middle of the couch on the patient's left.
BESIDE_MIDDLE = facing_couch(COUCH, 0., COUCH.width / 2 + 0.35)


class WorkspaceTests(unittest.TestCase):
    def test_kinds(self) -> None:
        full = make_workspace('full', COUCH)
        narrow = make_workspace('narrow', COUCH)
        one_side = make_workspace('one_side', COUCH, blocked_side='right')

        self.assertTrue(full.free_region.contains(narrow.free_region))
        self.assertTrue(full.free_region.contains(one_side.free_region))
        self.assertAlmostEqual(COUCH.width / 2 + 0.8, narrow.free_region.y_max)
        self.assertEqual(0., one_side.free_region.y_min)
        self.assertEqual(frozenset(('right',)), one_side.blocked_sides)

    def test_blocked_head(self) -> None:
        one_side = make_workspace('one_side', COUCH, blocked_side='head')
        self.assertEqual(COUCH.length / 2, one_side.free_region.x_max)

    def test_rejects_unknown_names(self) -> None:
        with self.assertRaises(ValueError):
            make_workspace('garden', COUCH)
        with self.assertRaises(ValueError):
            make_workspace('one_side', COUCH, blocked_side='top')


class CandidateTests(unittest.TestCase):
    params: RobotParams

    @classmethod
    def setUpClass(cls) -> None:
        cls.params = default_robot_params()

    def test_ring_points_keep_their_standoff(self) -> None:
        for standoff in (0.35, 0.55):
            for x, y in ring_points(COUCH, standoff, 0.25):
                dx = max(abs(x) - COUCH.length / 2, 0)
                dy = max(abs(y) - COUCH.width / 2, 0)
                with self.subTest(standoff=standoff, point=(x, y)):
                    self.assertAlmostEqual(standoff, math.hypot(dx, dy))

    def test_ring_spacing(self) -> None:
        points = np.array(ring_points(COUCH, 0.35, 0.25))
        steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        self.assertLess(float(steps.max()), 0.3)
        self.assertGreater(float(steps.min()), 0.15)

    def test_full_workspace_surrounds_couch(self) -> None:
        full = make_workspace('full', COUCH)
        candidates = enumerate_base_candidates(COUCH, full, self.params)

        count = len(candidates)
        self.assertTrue(40 <= count <= 200, "Got {} candidates".format(count))
        sides = {
            'head': any(x.x > COUCH.length / 2 for x in candidates),
            'foot': any(x.x < -COUCH.length / 2 for x in candidates),
            'left': any(x.y > COUCH.width / 2 for x in candidates),
            'right': any(x.y < -COUCH.width / 2 for x in candidates),
        }
        for side, present in sides.items():
            with self.subTest(side):
                self.assertTrue(present, "No candidate at the {}".format(side))

    def test_candidates_face_couch(self) -> None:
        full = make_workspace('full', COUCH)
        candidates = enumerate_base_candidates(COUCH, full, self.params)
        for base in candidates:
            nearest = (
                min(max(base.x, -COUCH.length / 2), COUCH.length / 2),
                min(max(base.y, -COUCH.width / 2), COUCH.width / 2),
            )
            facing = (math.cos(base.heading), math.sin(base.heading))
            towards = np.subtract(nearest, (base.x, base.y))
            with self.subTest(base=base):
                cosine = float(np.dot(facing, towards / np.linalg.norm(towards)))
                self.assertAlmostEqual(1., cosine)

    def test_blocked_side_has_no_candidates(self) -> None:
        workspace = make_workspace('one_side', COUCH, blocked_side='right')
        candidates = enumerate_base_candidates(COUCH, workspace, self.params)
        self.assertTrue(candidates)
        self.assertTrue(all(x.y > 0 for x in candidates))

    def test_narrow_room_fits_fewer(self) -> None:
        full = enumerate_base_candidates(COUCH, make_workspace('full', COUCH), self.params)
        narrow = enumerate_base_candidates(COUCH, make_workspace('narrow', COUCH), self.params)
        self.assertLessEqual(len(narrow), len(full))
        self.assertLessEqual(set(narrow), set(full))

    def test_region_smaller_than_couch(self) -> None:
        cramped = WorkspaceSpec('full', Rectangle.centred(1., 0.5))
        with self.assertRaises(NoCandidates):
            enumerate_base_candidates(COUCH, cramped, self.params)


class AnalyzeBasePositionTests(unittest.TestCase):
    params: RobotParams
    model: SurfaceModel
    workspace: WorkspaceSpec
    records: List[ConfigRecord]

    @classmethod
    def setUpClass(cls) -> None:
        cls.params = default_robot_params()
        cls.model = make_half_cylinder(1.75, 0.2, COUCH, 0.1)
        cls.workspace = make_workspace('full', COUCH)
        cls.records = analyze_base_position(
            BESIDE_MIDDLE,
            cls.model,
            cls.params,
            CAMERA,
            COUCH,
            cls.workspace,
        )

    def test_base_beyond_reach(self) -> None:
        roomy = make_workspace('full', COUCH, margin=20.)
        far = facing_couch(COUCH, 0., 10.)
        self.assertEqual([], analyze_base_position(
            far,
            self.model,
            self.params,
            CAMERA,
            COUCH,
            roomy,
        ))

    def test_base_outside_workspace(self) -> None:
        self.assertEqual([], analyze_base_position(
            BasePose(0, 0, 0),
            self.model,
            self.params,
            CAMERA,
            COUCH,
            self.workspace,
        ))

    def test_covers_most_of_near_side(self) -> None:
        self.assertTrue(self.records)
        union = np.unique(np.concatenate([x.visible for x in self.records]))
        near_side = self.model.samples.points[:, 1] > 0
        covered = np.isin(np.flatnonzero(near_side), union).mean()
        self.assertGreater(covered, 0.5)

    def test_records_are_consistent(self) -> None:
        for index, record in enumerate(self.records):
            with self.subTest(record=index):
                self.assertEqual(BESIDE_MIDDLE, record.base)
                camera = forward_kinematics(self.params, record.base, record.arm)
                self.assertTrue(camera.is_close(record.camera, 1e-9, 1e-9))
                np.testing.assert_array_equal(
                    visible_points(CAMERA, record.camera, self.model),
                    record.visible,
                )
                self.assertGreater(record.camera.translation[2], COUCH.height)

    def test_views_look_at_body(self) -> None:
        for index, record in enumerate(self.records):
            with self.subTest(record=index):
                forward = record.camera.axis(2)
                to_body = self.model.centre() - record.camera.translation
                self.assertGreater(float(forward @ to_body), 0)


class BuildDictionaryTests(unittest.TestCase):
    params: RobotParams
    model: SurfaceModel
    workspace: WorkspaceSpec
    candidates: List[BasePose]
    dictionary: ConfigDictionary

    @classmethod
    def setUpClass(cls) -> None:
        cls.params = default_robot_params()
        cls.model = make_half_cylinder(1.75, 0.2, COUCH, 0.1)
        cls.workspace = make_workspace('full', COUCH)
        cls.candidates = [
            BESIDE_MIDDLE,
            facing_couch(COUCH, 0.5, -(COUCH.width / 2 + 0.35)),
            facing_couch(COUCH, COUCH.length / 2 + 0.35, 0.),
        ]
        cls.dictionary = cls.build()

    @classmethod
    def build(cls, settings: AnalysisSettings = AnalysisSettings()) -> ConfigDictionary:
        return build_dictionary(
            cls.model,
            cls.params,
            CAMERA,
            COUCH,
            cls.workspace,
            settings,
            candidates=cls.candidates,
        )

    def assertSameRecords(self, expected: ConfigDictionary, actual: ConfigDictionary) -> None:
        self.assertEqual(expected.bases, actual.bases)
        self.assertEqual(expected.base_of, actual.base_of)
        self.assertEqual(expected.n_records, actual.n_records)
        for first, second in zip(expected.records, actual.records):
            self.assertEqual(first.base, second.base)
            np.testing.assert_allclose(first.arm.joints, second.arm.joints, atol=1e-12)
            self.assertTrue(first.camera.is_close(second.camera, 1e-9, 1e-9))
            np.testing.assert_array_equal(first.visible, second.visible)

    def test_records_grouped_by_base(self) -> None:
        groups = self.dictionary.records_by_base()
        self.assertEqual(sorted(self.dictionary.base_of), list(self.dictionary.base_of))
        for base, indices in groups.items():
            for index in indices:
                self.assertEqual(self.candidates[base], self.dictionary.records[index].base)

    def test_visible_sets_index_samples(self) -> None:
        union = self.dictionary.visible_union()
        self.assertGreater(len(union), 0)
        self.assertTrue(0 <= union.min() and union.max() < len(self.model.samples))
        self.assertEqual(len(self.model.samples), self.dictionary.n_samples)

    def test_deterministic(self) -> None:
        again = self.build()
        self.assertSameRecords(self.dictionary, again)
        self.assertEqual(self.dictionary.params_hash, again.params_hash)

    def test_parallel_build_matches(self) -> None:
        parallel = self.build(AnalysisSettings(workers=2))
        self.assertSameRecords(self.dictionary, parallel)
        self.assertEqual(self.dictionary.params_hash, parallel.params_hash)

    def test_timing_recorded(self) -> None:
        self.assertGreater(self.dictionary.analysis_time_per_base, 0)

    def test_hash_depends_on_inputs(self) -> None:
        changed = self.build(AnalysisSettings(view_standoff=0.7))
        self.assertNotEqual(self.dictionary.params_hash, changed.params_hash)

    def test_save_and_load(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'dictionary.npz'
            save_dictionary(path, self.dictionary)
            loaded = load_dictionary(path, self.dictionary.params_hash)

            with self.assertRaises(DictionaryMismatch):
                load_dictionary(path, 'not-the-hash')

        self.assertSameRecords(self.dictionary, loaded)
        self.assertEqual(self.dictionary.params_hash, loaded.params_hash)
        self.assertEqual(self.dictionary.model_resolution, loaded.model_resolution)


class KneedleTests(unittest.TestCase):
    def test_table_curve(self) -> None:
        curve = [(0.5, 62.23), (0.25, 86.39), (0.1, 96.43), (0.025, 98.14)]
        self.assertEqual(0.1, select_resolution_kneedle(curve))
        self.assertEqual(0.1, select_resolution_kneedle(curve[::-1]))

    def test_straight_line_has_no_knee(self) -> None:
        xs = np.linspace(0, 1, 5)
        with self.assertRaises(NoKnee):
            find_knee(xs, xs)

    def test_exponential_saturation(self) -> None:
        # The normalised difference of 1 - exp(-5x) peaks at ln(5 / (1 - e^-5)) / 5.
        xs = np.linspace(0, 1, 20)
        knee = xs[find_knee(xs, 1 - np.exp(-5 * xs))]
        self.assertAlmostEqual(0.32, knee, delta=0.05)

    def test_too_few_points(self) -> None:
        with self.assertRaises(NoKnee):
            select_resolution_kneedle([(0.5, 60.), (0.25, 80.), (0.1, 90.)])

    def test_flat_curve(self) -> None:
        with self.assertRaises(NoKnee):
            find_knee([1, 2, 3, 4], [5, 5, 5, 5])

    def test_requires_increasing_x(self) -> None:
        with self.assertRaises(ValueError):
            find_knee([1, 3, 2, 4], [0, 1, 2, 3])


if __name__ == '__main__':
    unittest.main()
