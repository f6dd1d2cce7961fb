#!/usr/bin/env python

import math
import tempfile
import unittest
from typing import Set
from pathlib import Path

import numpy as np

from .camera import CameraModel, OCCLUSION_TOLERANCE
from ..bodies import CouchSpec, SurfaceModel, model_from_mesh, make_half_cylinder
from .capture import ScanFrame, render_scan, write_frame
from ..geometry import Pose, FloatArray, TriangleMesh, look_rotation
from .visibility import visible_points

COUCH = CouchSpec()
CAMERA = CameraModel()


def looking_at(position: FloatArray, target: FloatArray) -> Pose:
    return Pose.from_rotation(look_rotation(target - position), position)


def flat_patch(size: float, z: float) -> SurfaceModel:
    half = size / 2
    mesh = TriangleMesh(
        [(-half, -half, z), (half, -half, z), (half, half, z), (-half, half, z)],
        [(0, 1, 2), (0, 2, 3)],
    )
    return model_from_mesh('patch', mesh, COUCH, 0.02, seed=0)


def brute_force_visible(cam: CameraModel, pose: Pose, model: SurfaceModel) -> Set[int]:
    """Each of the four conditions checked point by point against every triangle."""
    origin = pose.translation
    inverse = pose.inverse()
    corners = model.mesh.vertices[model.mesh.triangles]
    edge1 = corners[:, 1] - corners[:, 0]
    edge2 = corners[:, 2] - corners[:, 0]

    seen = set()
    for index, (point, normal) in enumerate(zip(model.samples.points, model.normals)):
        x, y, z = inverse.apply(point)
        if z <= 0:
            continue
        if abs(math.atan2(x, z)) > cam.h_fov / 2 or abs(math.atan2(y, z)) > cam.v_fov / 2:
            continue

        offset = point - origin
        distance = float(np.linalg.norm(offset))
        if not cam.min_range <= distance <= cam.max_range:
            continue

        direction = offset / distance
        cosine = float(np.clip(-direction @ normal, -1, 1))
        if math.acos(cosine) > cam.max_incidence + 1e-12:
            continue

        pvec = np.cross(direction, edge2)
        det = np.einsum('ij,ij->i', edge1, pvec)
        usable = np.abs(det) >= 1e-12
        det = np.where(usable, det, 1.)
        tvec = origin - corners[:, 0]
        u = np.einsum('ij,ij->i', tvec, pvec) / det
        qvec = np.cross(tvec, edge1)
        v = (qvec @ direction) / det
        t = np.einsum('ij,ij->i', edge2, qvec) / det
        blocked = usable & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 1e-6)
        blocked &= t < distance - OCCLUSION_TOLERANCE
        if not blocked.any():
            seen.add(index)
    return seen


class VisiblePointsTests(unittest.TestCase):
    cylinder: SurfaceModel

    @classmethod
    def setUpClass(cls) -> None:
        cls.cylinder = make_half_cylinder(1.75, 0.2, COUCH, 0.1)

    def test_patch_seen_from_above(self) -> None:
        patch = flat_patch(0.2, 1.)
        pose = looking_at(np.array((0., 0., 1.6)), np.zeros(3))

        visible = visible_points(CAMERA, pose, patch)

        self.assertEqual(list(range(len(patch.samples))), visible.tolist())

    def test_patch_closer_than_minimum_range(self) -> None:
        patch = flat_patch(0.2, 1.)
        pose = looking_at(np.array((0., 0., 1.3)), np.zeros(3))
        self.assertEqual(0, len(visible_points(CAMERA, pose, patch)))

    def test_cylinder_from_above_excludes_steep_sides(self) -> None:
        apex = COUCH.height + 0.2
        pose = looking_at(np.array((0., 0., apex + 1.)), np.array((0., 0., apex)))

        visible = visible_points(CAMERA, pose, self.cylinder)

        # Rays off the apex tilt by up to ~15°, so allow that on top of the limit.
        steep = self.cylinder.normals[:, 2] < math.cos(CAMERA.max_incidence + math.radians(15))
        curved = np.abs(self.cylinder.normals[:, 0]) < 0.5
        self.assertTrue(np.any(steep & curved))
        self.assertGreater(len(visible), 0)
        self.assertFalse(
            np.any((steep & curved)[visible]),
            "Steep side samples should not be visible",
        )
        expected = brute_force_visible(CAMERA, pose, self.cylinder)
        self.assertEqual(expected, set(visible.tolist()))

    def test_matches_brute_force_on_random_scenes(self) -> None:
        rng = np.random.default_rng(20)
        centre = self.cylinder.centre()
        for scene in range(20):
            position = centre + rng.uniform((-1.5, -1.5, 0.1), (1.5, 1.5, 1.5))
            aim = centre + rng.uniform(-0.3, 0.3, size=3)
            pose = looking_at(position, aim)
            cam = CAMERA._replace(max_incidence=math.radians(rng.uniform(30, 90)))
            with self.subTest(scene=scene):
                self.assertEqual(
                    brute_force_visible(cam, pose, self.cylinder),
                    set(visible_points(cam, pose, self.cylinder).tolist()),
                )

    def test_far_side_hidden_from_lateral_camera(self) -> None:
        for x in (-0.6, 0., 0.6):
            position = np.array((x, 1.2, COUCH.height + 0.01))
            pose = looking_at(position, np.array((x, 0., COUCH.height)))
            with self.subTest(x=x):
                visible = visible_points(CAMERA, pose, self.cylinder)
                self.assertGreater(len(visible), 0)
                far_side = self.cylinder.samples.points[visible, 1] < -0.01
                self.assertFalse(far_side.any(), "Saw samples behind the body midline")

    def test_narrower_limits_never_add_points(self) -> None:
        rng = np.random.default_rng(21)
        centre = self.cylinder.centre()
        for scene in range(10):
            position = centre + rng.uniform((-1.2, -1.2, 0.3), (1.2, 1.2, 1.2))
            pose = looking_at(position, centre)
            wide = set(visible_points(CAMERA, pose, self.cylinder).tolist())
            narrower = {
                'incidence': CAMERA._replace(max_incidence=math.radians(40)),
                'fov': CAMERA._replace(h_fov=math.radians(30), v_fov=math.radians(20)),
            }
            for name, cam in narrower.items():
                with self.subTest(scene=scene, narrower=name):
                    subset = set(visible_points(cam, pose, self.cylinder).tolist())
                    self.assertLessEqual(subset, wide)

    def test_rejects_bad_camera(self) -> None:
        cases = {
            'range': CAMERA._replace(min_range=2., max_range=1.),
            'fov': CAMERA._replace(h_fov=math.pi),
            'incidence': CAMERA._replace(max_incidence=2.),
            'noise': CAMERA._replace(noise_sigma=-1.),
        }
        for name, cam in cases.items():
            with self.subTest(name), self.assertRaises(ValueError):
                cam.validated()


class RenderScanTests(unittest.TestCase):
    cylinder: SurfaceModel

    @classmethod
    def setUpClass(cls) -> None:
        cls.cylinder = make_half_cylinder(1.75, 0.2, COUCH, 0.02)
        apex = COUCH.height + 0.2
        cls.pose = looking_at(np.array((0.1, 0.3, apex + 0.9)), np.array((0., 0., apex)))

    def test_noiseless_capture_is_the_visible_samples(self) -> None:
        frame = render_scan(CAMERA.noiseless(), self.pose, self.cylinder, seed=1)

        self.assertTrue(frame.camera_pose_actual.is_close(self.pose))
        expected = self.cylinder.samples.points[frame.visible_indices]
        np.testing.assert_allclose(frame.world_cloud().points, expected, atol=1e-9)

    def test_deterministic(self) -> None:
        first = render_scan(CAMERA, self.pose, self.cylinder, seed=[4, 2])
        second = render_scan(CAMERA, self.pose, self.cylinder, seed=[4, 2])

        self.assertTrue(first.camera_pose_actual.is_close(second.camera_pose_actual, 0, 0))
        np.testing.assert_array_equal(first.visible_indices, second.visible_indices)
        np.testing.assert_array_equal(first.cloud.points, second.cloud.points)

    def test_jitter_moves_actual_pose(self) -> None:
        frame = render_scan(CAMERA, self.pose, self.cylinder, seed=3)
        self.assertFalse(frame.camera_pose_actual.is_close(self.pose))
        self.assertLess(frame.camera_pose_actual.distance_to(self.pose), 0.05)
        self.assertLess(math.degrees(frame.camera_pose_actual.angle_to(self.pose)), 5)

    def test_depth_noise_along_rays(self) -> None:
        noisy_cam = CAMERA._replace(noise_sigma=0.002, pose_jitter=(0., 0.))
        clean = render_scan(CAMERA.noiseless(), self.pose, self.cylinder, seed=5)
        noisy = render_scan(noisy_cam, self.pose, self.cylinder, seed=5)

        np.testing.assert_array_equal(clean.visible_indices, noisy.visible_indices)
        self.assertGreaterEqual(len(clean.cloud), 1000)

        rays = clean.cloud.points / np.linalg.norm(clean.cloud.points, axis=1, keepdims=True)
        displacement = noisy.cloud.points - clean.cloud.points
        along = np.einsum('ij,ij->i', displacement, rays)
        across = displacement - along[:, np.newaxis] * rays

        self.assertTrue(1.6e-3 <= float(np.std(along)) <= 2.4e-3, "Depth noise off its sigma")
        self.assertLess(float(np.abs(across).max()), 1e-9)

    def test_noise_stream_apart_from_jitter(self) -> None:
        default = render_scan(CAMERA, self.pose, self.cylinder, seed=5)
        self.assertGreater(len(default.cloud), 0)

        for noise_seed in (5, 9):
            with self.subTest(noise_seed=noise_seed):
                explicit = render_scan(
                    CAMERA,
                    self.pose,
                    self.cylinder,
                    seed=5,
                    noise_seed=noise_seed,
                )
                actual = explicit.camera_pose_actual
                self.assertTrue(actual.is_close(default.camera_pose_actual, 0, 0))
                np.testing.assert_array_equal(
                    default.visible_indices,
                    explicit.visible_indices,
                )
                self.assertFalse(np.allclose(default.cloud.points, explicit.cloud.points))

    def test_cloud_within_range_band(self) -> None:
        noisy = CAMERA._replace(noise_sigma=0.05)
        frame = render_scan(noisy, self.pose, self.cylinder, seed=6)
        distances = np.linalg.norm(frame.cloud.points, axis=1)
        self.assertTrue(np.all(distances >= 0.9 * CAMERA.min_range - 1e-12))
        self.assertTrue(np.all(distances <= 1.1 * CAMERA.max_range + 1e-12))

    def test_nothing_in_view(self) -> None:
        away = looking_at(np.array((0., 0., 3.)), np.array((0., 0., 6.)))
        frame = render_scan(CAMERA, away, self.cylinder, seed=7)
        self.assertIsInstance(frame, ScanFrame)
        self.assertEqual(0, len(frame.cloud))

    def test_write_frame(self) -> None:
        frame = render_scan(CAMERA, self.pose, self.cylinder, seed=8)
        with tempfile.TemporaryDirectory() as directory:
            path = write_frame(Path(directory), 3, frame)
            self.assertEqual('frame-003.ply', path.name)
            sidecar = (Path(directory) / 'frame-003.txt').read_text().splitlines()

        self.assertTrue(sidecar[0].startswith('commanded: '))
        self.assertTrue(sidecar[1].startswith('actual: '))
        self.assertEqual(7, len(sidecar[1].split()) - 1)
        self.assertEqual('points: {}'.format(len(frame.cloud)), sidecar[2])


if __name__ == '__main__':
    unittest.main()
