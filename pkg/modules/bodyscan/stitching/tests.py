#!/usr/bin/env python

import math
import tempfile
import unittest
from typing import Set, List, Tuple
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

from . import pipeline
from .icp import IcpResult, best_fit_transform, icp_point_to_point
from ..bodies import (
    CouchSpec,
    SurfaceModel,
    half_cylinder_mesh,
    make_half_cylinder,
    sample_mesh_surface,
)
from ..errors import NoFrames, InsufficientOverlap, CoarseAlignmentFailure
from ..sensor import ScanFrame, CameraModel, render_scan
from .outliers import remove_outliers
from .pipeline import (
    stitch_full,
    StitchResult,
    coarse_assemble,
    corrections_table,
    write_stitch_result,
)
from ..geometry import (
    Pose,
    FloatArray,
    PointCloud,
    look_rotation,
    NeighborIndex,
    voxel_downsample,
)

COUCH = CouchSpec()
CAMERA = CameraModel()
APEX = COUCH.height + 0.2


def looking_at(position: FloatArray, target: FloatArray) -> Pose:
    return Pose.from_rotation(look_rotation(target - position), position)


def overhead(x: float, y: float = 0.) -> Pose:
    return looking_at(np.array((x, y, APEX + 0.9)), np.array((x, 0., APEX)))


def mean_nearest(cloud: PointCloud, reference: PointCloud) -> float:
    distances, _ = NeighborIndex(reference.points).query(cloud.points, math.inf)
    return float(distances.mean())


def random_patch(seed: int, count: int = 2000) -> PointCloud:
    mesh = half_cylinder_mesh(1.75, 0.2, COUCH.height)
    samples = sample_mesh_surface(mesh, 0.015, seed)
    rng = np.random.default_rng(seed)
    return samples.select(np.sort(rng.choice(len(samples), size=count, replace=False)))


def grid_cloud(side: int, spacing: float) -> PointCloud:
    xs, ys = np.meshgrid(np.arange(side) * spacing, np.arange(side) * spacing)
    return PointCloud(np.column_stack((xs.ravel(), ys.ravel(), np.zeros(side * side))))


class BestFitTransformTests(unittest.TestCase):
    def test_recovers_known_motion(self) -> None:
        rng = np.random.default_rng(1)
        source = rng.normal(size=(50, 3))
        motion = Pose.from_rotvec(rng.normal(scale=0.5, size=3), rng.normal(size=3))

        fitted = best_fit_transform(source, motion.apply(source))

        self.assertTrue(fitted.is_close(motion, 1e-9, 1e-9))

    def test_never_returns_a_reflection(self) -> None:
        source = np.array([(0., 0., 0.), (1., 0., 0.), (0., 1., 0.), (0., 0., 1.)])
        mirrored = source * (1., 1., -1.)

        fitted = best_fit_transform(source, mirrored)

        self.assertAlmostEqual(1., float(np.linalg.det(fitted.rotation_matrix())))


class IcpTests(unittest.TestCase):
    def test_identical_clouds(self) -> None:
        cloud = random_patch(seed=2)

        result = icp_point_to_point(cloud, cloud, 0.05, 50)

        self.assertIsInstance(result, IcpResult)
        self.assertTrue(result.correction.is_close(Pose.identity(), 1e-9, 1e-9))
        self.assertAlmostEqual(0., result.rms, places=9)

    def test_recovers_perturbation(self) -> None:
        for seed in range(20):
            with self.subTest(seed=seed):
                target = random_patch(seed)
                rng = np.random.default_rng(seed)
                axis = np.array((0., 0., 1.))
                direction = rng.normal(size=3)
                perturbation = Pose.from_rotvec(
                    math.radians(5) * axis,
                    0.02 * direction / np.linalg.norm(direction),
                )
                source = target.transformed(perturbation)

                result = icp_point_to_point(source, target, 0.1, 100)

                expected = perturbation.inverse()
                self.assertLess(math.degrees(result.correction.angle_to(expected)), 0.5)
                self.assertLess(result.correction.distance_to(expected), 0.005)
                self.assertLess(result.rms, 0.002)

    def test_residuals_never_increase(self) -> None:
        rng = np.random.default_rng(3)
        target = random_patch(seed=3)
        source = PointCloud(
            target.transformed(Pose.from_rotvec((0., 0., 0.05), (0.01, -0.01, 0.))).points +
            rng.normal(scale=0.003, size=(len(target), 3)),
        )

        result = icp_point_to_point(source, target, 0.05, 50)

        self.assertTrue(np.all(np.diff(result.residuals) <= 0), result.residuals)
        self.assertEqual(result.residuals[-1], result.rms)

    def test_equivariant_under_common_motion(self) -> None:
        target = random_patch(seed=4)
        source = target.transformed(Pose.from_rotvec((0., 0., 0.04), (0.01, 0.005, 0.)))
        common = Pose.from_rotvec((0.3, -0.2, 1.), (2., -1., 0.5))

        plain = icp_point_to_point(source, target, 0.05, 50)
        moved = icp_point_to_point(
            source.transformed(common),
            target.transformed(common),
            0.05,
            50,
        )

        expected = common.compose(plain.correction).compose(common.inverse())
        self.assertTrue(moved.correction.is_close(expected, 1e-6, 1e-6))

    def test_disjoint_clouds(self) -> None:
        cloud = random_patch(seed=5, count=200)
        far = cloud.transformed(Pose.from_translation((10., 0., 0.)))
        with self.assertRaises(InsufficientOverlap):
            icp_point_to_point(far, cloud, 0.05, 50)

    def test_tiny_clouds(self) -> None:
        cloud = random_patch(seed=6, count=9)
        with self.assertRaises(InsufficientOverlap):
            icp_point_to_point(cloud, cloud, 0.05, 50)


class RemoveOutliersTests(unittest.TestCase):
    def test_isolated_point_removed(self) -> None:
        grid = grid_cloud(10, 0.01)
        stray = PointCloud(np.vstack((grid.points, (0.05, 0.05, 1.))))

        kept = remove_outliers(stray, k=8, sigma_mult=2.)

        self.assertEqual(len(grid), len(kept))
        np.testing.assert_array_equal(grid.points, kept.points)

    def test_uniform_grid_interior_retained(self) -> None:
        spacing = 0.01
        grid = grid_cloud(50, spacing)

        kept = remove_outliers(grid, k=20)

        # 20 neighbours lie within 2.24 spacings, so points 3 or more rows from
        # the border all share the smallest neighbour distance.
        low, high = 3 * spacing, 46 * spacing
        coords = grid.points[:, :2]
        interior = grid.points[np.all((coords > low - 1e-9) & (coords < high + 1e-9), axis=1)]
        self.assertEqual(44 * 44, len(interior))
        def cells(points: FloatArray) -> Set[Tuple[int, ...]]:
            return {tuple(x) for x in np.round(points / spacing).astype(int)}

        self.assertEqual(set(), cells(interior) - cells(kept.points))

    def test_small_clouds_unchanged(self) -> None:
        for count in (0, 5, 20):
            with self.subTest(count=count):
                cloud = PointCloud(np.random.default_rng(count).normal(size=(count, 3)))
                self.assertIs(cloud, remove_outliers(cloud, k=20))

    def test_rejects_zero_neighbours(self) -> None:
        with self.assertRaises(ValueError):
            remove_outliers(grid_cloud(5, 0.01), k=0)


class StitchTests(unittest.TestCase):
    coarse_body: SurfaceModel
    fine_body: SurfaceModel

    @classmethod
    def setUpClass(cls) -> None:
        cls.coarse_body = make_half_cylinder(1.75, 0.2, COUCH, 0.1)
        cls.fine_body = make_half_cylinder(1.75, 0.2, COUCH, 0.02)

    def frames(
        self,
        body: SurfaceModel,
        cam: CameraModel,
        stops: List[List[Pose]],
        seed: int,
    ) -> List[List[ScanFrame]]:
        return [
            [
                render_scan(cam, pose, body, seed=[seed, stop, view])
                for view, pose in enumerate(poses)
            ]
            for stop, poses in enumerate(stops)
        ]

    def test_no_frames(self) -> None:
        for frames in ([], [[]], [[], []]):
            with self.subTest(frames=frames), self.assertRaises(NoFrames):
                coarse_assemble(frames)

    def test_single_frame_matches_visible_samples(self) -> None:
        frames = self.frames(self.fine_body, CAMERA.noiseless(), [[overhead(0.)]], seed=1)

        clouds = coarse_assemble(frames)

        self.assertEqual(1, len(clouds))
        truth = self.fine_body.samples.select(frames[0][0].visible_indices)
        self.assertGreater(len(truth), 0)
        self.assertLess(mean_nearest(clouds[0], truth), 0.005)
        self.assertLess(mean_nearest(truth, clouds[0]), 0.005)

    def test_repeated_view_deduplicated(self) -> None:
        pose = overhead(0.)
        frames = self.frames(self.fine_body, CAMERA.noiseless(), [[pose, pose]], seed=2)

        clouds = coarse_assemble(frames)

        self.assertEqual(1, len(clouds))
        self.assertLess(len(clouds[0]), sum(len(x.cloud) for x in frames[0]))

    def test_one_stop_applies_no_icp(self) -> None:
        frames = self.frames(self.fine_body, CAMERA, [[overhead(-0.2), overhead(0.2)]], seed=3)

        result = stitch_full(frames)

        self.assertEqual((Pose.identity(),), result.per_stage_transforms)
        self.assertEqual((0.,), result.icp_residuals)
        expected = voxel_downsample(remove_outliers(coarse_assemble(frames)[0]), 0.01)
        np.testing.assert_allclose(expected.points, result.cloud.points)

    def test_noiseless_stops_need_no_correction(self) -> None:
        stops = [[overhead(-0.3)], [overhead(0.)], [overhead(0.3)]]
        frames = self.frames(self.coarse_body, CAMERA.noiseless(), stops, seed=4)

        result = stitch_full(frames)

        self.assertEqual(3, len(result.per_stage_transforms))
        for number, correction in enumerate(result.per_stage_transforms):
            with self.subTest(stop=number):
                self.assertTrue(correction.is_close(Pose.identity(), 1e-6, 1e-6))
        self.assertTrue(all(math.isfinite(x) for x in result.icp_residuals))

    def test_alignment_reduces_jitter_misalignment(self) -> None:
        stops = [[overhead(-0.25, 0.1)], [overhead(0.25, -0.1)]]
        frames = self.frames(self.fine_body, CAMERA._replace(noise_sigma=0.), stops, seed=5)
        anchor, second = coarse_assemble(frames)

        result = stitch_full(frames)

        distances, _ = NeighborIndex(anchor.points).query(second.points, 0.05)
        overlap = second.select(np.flatnonzero(np.isfinite(distances)))
        aligned = overlap.transformed(result.per_stage_transforms[1])
        before = mean_nearest(overlap, anchor)
        after = mean_nearest(aligned, anchor)
        self.assertLessEqual(after, before)

    def test_deterministic(self) -> None:
        stops = [[overhead(-0.3)], [overhead(0.3)]]
        first = stitch_full(self.frames(self.fine_body, CAMERA, stops, seed=6))
        second = stitch_full(self.frames(self.fine_body, CAMERA, stops, seed=6))

        np.testing.assert_array_equal(first.cloud.points, second.cloud.points)
        self.assertEqual(first.icp_residuals, second.icp_residuals)
        self.assertEqual(first.rejected_outliers, second.rejected_outliers)

    def test_gross_correction_rejected(self) -> None:
        frames = self.frames(
            self.fine_body,
            CAMERA.noiseless(),
            [[overhead(-0.2)], [overhead(0.2)]],
            seed=7,
        )
        turned = IcpResult(Pose.from_rotvec((0., 0., math.radians(45))), 0.001, (0.001,))

        with mock.patch.object(pipeline, 'icp_point_to_point', return_value=turned):
            with self.assertRaises(CoarseAlignmentFailure):
                stitch_full(frames)

    def test_write_result(self) -> None:
        stops = [[overhead(-0.3)], [overhead(0.3)]]
        frames = self.frames(self.fine_body, CAMERA, stops, seed=8)
        result = stitch_full(frames)

        with tempfile.TemporaryDirectory() as directory:
            write_stitch_result(Path(directory), result)
            self.assertTrue((Path(directory) / 'stitched.ply').exists())
            table = pd.read_csv(Path(directory) / 'corrections.csv')

        self.assertIsInstance(result, StitchResult)
        self.assertEqual(['stage', 'angle_deg', 'translation_m', 'rms_m'], list(table.columns))
        self.assertEqual([1, 2], table['stage'].tolist())
        pd.testing.assert_frame_equal(corrections_table(result), table, check_dtype=False)


if __name__ == '__main__':
    unittest.main()
