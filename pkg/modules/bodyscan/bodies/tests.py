#!/usr/bin/env python

import math
import unittest

import numpy as np

from .models import CouchSpec, SurfaceModel, strip_underside
from ..errors import EmptyMesh, ResolutionTooCoarse
from .humanoid import HUMANOID_PARTS, make_supine_humanoid
from .sampling import model_from_mesh, sample_mesh_surface
from ..geometry import PointCloud, TriangleMesh
from .half_cylinder import make_half_cylinder

COUCH = CouchSpec()


def flat_square(size: float, z: float = 0.) -> TriangleMesh:
    half = size / 2
    return TriangleMesh(
        [(-half, -half, z), (half, -half, z), (half, half, z), (-half, half, z)],
        [(0, 1, 2), (0, 2, 3)],
    )


def unit_box(inward: bool = False) -> TriangleMesh:
    vertices = [
        (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
        (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
    ]
    triangles = np.array([
        (0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7),
        (0, 1, 5), (0, 5, 4), (1, 2, 6), (1, 6, 5),
        (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7),
    ])
    if inward:
        triangles = triangles[:, ::-1]
    return TriangleMesh(vertices, triangles)


class SurfaceAssertions(unittest.TestCase):
    def assertSamplesOnMesh(self, cloud: PointCloud, mesh: TriangleMesh) -> None:
        v0, v1, v2 = mesh.corners()
        edge1, edge2 = v1 - v0, v2 - v0
        normals = mesh.face_normals()

        offsets = cloud.points[:, np.newaxis, :] - v0[np.newaxis, :, :]
        heights = np.abs(np.einsum('ptk,tk->pt', offsets, normals))

        # Barycentric coordinates of each point's projection onto each plane.
        d00 = np.einsum('tk,tk->t', edge1, edge1)
        d01 = np.einsum('tk,tk->t', edge1, edge2)
        d11 = np.einsum('tk,tk->t', edge2, edge2)
        d20 = np.einsum('ptk,tk->pt', offsets, edge1)
        d21 = np.einsum('ptk,tk->pt', offsets, edge2)
        denominator = d00 * d11 - d01 ** 2
        v = (d11 * d20 - d01 * d21) / denominator
        w = (d00 * d21 - d01 * d20) / denominator
        inside = (v >= -1e-9) & (w >= -1e-9) & (v + w <= 1 + 1e-9)

        on_mesh = np.any(inside & (heights <= 1e-6), axis=1)
        self.assertTrue(
            np.all(on_mesh),
            f"Samples off the mesh: {cloud.points[~on_mesh][:5]}",
        )


class HalfCylinderTests(SurfaceAssertions):
    def test_sample_count_matches_area(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.1)

        area = math.pi * 0.2 * 1.75 + math.pi * 0.2 ** 2
        expected = area / 0.1 ** 2
        self.assertAlmostEqual(expected, len(model.samples), delta=0.2 * expected)

    def test_fine_sample_count_matches_area(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.01)

        area = math.pi * 0.2 * 1.75 + math.pi * 0.2 ** 2
        expected = area / 0.01 ** 2
        self.assertAlmostEqual(expected, len(model.samples), delta=0.05 * expected)

    def test_normals_face_upwards_or_sideways(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.05)
        self.assertGreaterEqual(model.normals[:, 2].min(), 0)

    def test_normals_point_outwards(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.05)
        points = model.samples.points

        curved = np.abs(points[:, 0]) < 1.75 / 2 - 1e-9
        radial = points[curved] - np.column_stack((
            points[curved, 0],
            np.zeros(curved.sum()),
            np.full(curved.sum(), COUCH.height),
        ))
        dots = np.einsum('ij,ij->i', radial, model.normals[curved])
        self.assertGreater(dots.min(), 0)

        caps = ~curved
        np.testing.assert_allclose(
            np.sign(points[caps, 0]),
            model.normals[caps, 0],
            err_msg="End cap normals should point along the axis, away from the body",
        )

    def test_apex_height(self) -> None:
        for resolution in (0.1, 0.05, 0.02):
            with self.subTest(resolution=resolution):
                model = make_half_cylinder(1.75, 0.2, COUCH, resolution)
                apex = model.samples.points[:, 2].max()
                self.assertAlmostEqual(COUCH.height + 0.2, apex, delta=resolution / 2)

    def test_samples_lie_on_mesh(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.1)
        self.assertSamplesOnMesh(model.samples, model.mesh)

    def test_mesh_winds_outwards(self) -> None:
        mesh = make_half_cylinder(1.0, 0.3, COUCH, 0.1).mesh
        interior = np.array((0, 0, COUCH.height + 0.1))
        dots = np.einsum('ij,ij->i', mesh.face_normals(), mesh.centroids() - interior)
        self.assertGreater(dots.min(), 0)

    def test_mesh_sits_on_couch(self) -> None:
        mesh = make_half_cylinder(1.75, 0.2, COUCH, 0.1).mesh
        self.assertAlmostEqual(COUCH.height, mesh.vertices[:, 2].min())
        self.assertAlmostEqual(COUCH.height + 0.2, mesh.vertices[:, 2].max())

    def test_resolution_coarser_than_radius(self) -> None:
        with self.assertRaises(ResolutionTooCoarse):
            make_half_cylinder(1.75, 0.2, COUCH, 0.25)

    def test_rejects_non_positive_dimensions(self) -> None:
        for length, radius, resolution in ((0, 0.2, 0.1), (1.75, -0.2, 0.1), (1.75, 0.2, 0)):
            with self.subTest(length=length, radius=radius, resolution=resolution):
                with self.assertRaises(ValueError):
                    make_half_cylinder(length, radius, COUCH, resolution)

    def test_rejects_bad_couch(self) -> None:
        with self.assertRaises(ValueError):
            make_half_cylinder(1.75, 0.2, CouchSpec(height=0), 0.1)


class SampleMeshSurfaceTests(SurfaceAssertions):
    def test_unit_square(self) -> None:
        mesh = TriangleMesh(
            [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)],
            [(0, 1, 2), (0, 2, 3)],
        )
        cloud = sample_mesh_surface(mesh, 0.5, seed=3)

        self.assertGreaterEqual(len(cloud), 4)
        self.assertLessEqual(len(cloud), 9)
        assert cloud.normals is not None
        np.testing.assert_allclose(cloud.normals, np.tile((0, 0, 1), (len(cloud), 1)))

    def test_flat_mesh_normals_face_up_whatever_the_winding(self) -> None:
        mesh = TriangleMesh(
            [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)],
            [(0, 2, 1), (0, 3, 2)],
        )
        cloud = sample_mesh_surface(mesh, 0.2, seed=3)
        assert cloud.normals is not None
        np.testing.assert_allclose(cloud.normals[:, 2], 1)

    def test_deterministic(self) -> None:
        first = sample_mesh_surface(unit_box(), 0.1, seed=7)
        second = sample_mesh_surface(unit_box(), 0.1, seed=7)
        np.testing.assert_array_equal(first.points, second.points)

    def test_seed_changes_samples(self) -> None:
        first = sample_mesh_surface(unit_box(), 0.1, seed=7)
        second = sample_mesh_surface(unit_box(), 0.1, seed=8)
        self.assertFalse(
            len(first) == len(second) and np.array_equal(first.points, second.points),
            "Different seeds should give different samples",
        )

    def test_halving_resolution_quadruples_count(self) -> None:
        mesh = flat_square(4.)
        coarse = len(sample_mesh_surface(mesh, 0.2, seed=1))
        fine = len(sample_mesh_surface(mesh, 0.1, seed=1))
        self.assertAlmostEqual(4, fine / coarse, delta=4 * 0.3)

    def test_samples_lie_on_mesh(self) -> None:
        mesh = unit_box()
        self.assertSamplesOnMesh(sample_mesh_surface(mesh, 0.1, seed=2), mesh)

    def test_normals_point_outwards_for_inward_wound_mesh(self) -> None:
        for inward in (False, True):
            with self.subTest(inward=inward):
                cloud = sample_mesh_surface(unit_box(inward), 0.1, seed=2)
                assert cloud.normals is not None
                dots = np.einsum('ij,ij->i', cloud.normals, cloud.points - 0.5)
                self.assertGreater(dots.min(), 0)

    def test_empty_mesh(self) -> None:
        mesh = TriangleMesh([(0, 0, 0)], np.zeros((0, 3), dtype=int))
        with self.assertRaises(EmptyMesh):
            sample_mesh_surface(mesh, 0.1, seed=0)

    def test_rejects_non_positive_resolution(self) -> None:
        with self.assertRaises(ValueError):
            sample_mesh_surface(unit_box(), 0, seed=0)


class StripUndersideTests(unittest.TestCase):
    def test_half_cylinder(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.1)
        stripped = strip_underside(model)

        self.assertTrue(stripped.stripped)
        self.assertFalse(model.stripped)
        self.assertLess(len(stripped.samples), len(model.samples))

        apex = model.samples.points[:, 2].max()
        self.assertAlmostEqual(apex, stripped.samples.points[:, 2].max(), msg="Apex removed")

        # Points at the foot of the end caps are gone.
        on_caps = np.abs(stripped.samples.points[:, 0]) >= 1.75 / 2 - 1e-9
        low = stripped.samples.points[:, 2] < COUCH.height + 0.1
        self.assertFalse(np.any(on_caps & low))

    def test_retained_points_unchanged(self) -> None:
        model = make_half_cylinder(1.75, 0.2, COUCH, 0.05)
        stripped = strip_underside(model)

        original = {tuple(x) for x in model.samples.points}
        self.assertTrue(all(tuple(x) in original for x in stripped.samples.points))

    def test_upward_facing_model_unchanged(self) -> None:
        model = model_from_mesh('plate', flat_square(1., z=COUCH.height), COUCH, 0.1, seed=0)
        stripped = strip_underside(model)
        np.testing.assert_array_equal(model.samples.points, stripped.samples.points)

    def test_keeps_other_fields(self) -> None:
        for model in (
            make_half_cylinder(1.75, 0.2, COUCH, 0.1),
            make_supine_humanoid(COUCH, 0.1, seed=0),
        ):
            with self.subTest(model=model.name):
                self.assertNotEqual(len(model._fields), len(model.samples))
                stripped = strip_underside(model)
                self.assertEqual(model.name, stripped.name)
                self.assertIs(model.mesh, stripped.mesh)
                self.assertEqual(model.resolution, stripped.resolution)
                self.assertEqual(model.couch, stripped.couch)
                self.assertGreater(len(stripped.samples), 0)

    def test_idempotent(self) -> None:
        for model in (
            make_half_cylinder(1.75, 0.2, COUCH, 0.1),
            make_supine_humanoid(COUCH, 0.1, seed=0),
        ):
            with self.subTest(model=model.name):
                once = strip_underside(model)
                twice = strip_underside(once)
                np.testing.assert_array_equal(once.samples.points, twice.samples.points)


class HumanoidTests(unittest.TestCase):
    def setUp(self) -> None:
        self.model = make_supine_humanoid(COUCH, 0.05, seed=4)

    def test_deterministic(self) -> None:
        again = make_supine_humanoid(COUCH, 0.05, seed=4)
        np.testing.assert_array_equal(self.model.samples.points, again.samples.points)

    def test_underside_fraction(self) -> None:
        removed = 1 - len(strip_underside(self.model).samples) / len(self.model.samples)
        self.assertGreaterEqual(removed, 0.05)
        self.assertLessEqual(removed, 0.40)

    def test_samples_rest_on_couch(self) -> None:
        points = self.model.samples.points
        self.assertGreaterEqual(points[:, 2].min(), COUCH.height)
        self.assertTrue(
            COUCH.footprint().contains_points(points),
            "Body overhangs the couch",
        )

    def test_head_towards_positive_x(self) -> None:
        points = self.model.samples.points
        tallest = points[np.argmax(points[:, 2])]
        self.assertGreater(points[:, 0].max(), 0.8)
        self.assertLess(points[:, 0].min(), -0.8)
        self.assertGreater(tallest[0], -0.2, "Highest point should be on the upper body")

    def test_no_buried_samples(self) -> None:
        points = self.model.samples.points
        buried = 0
        for part in HUMANOID_PARTS:
            scaled = (points - part.centre(COUCH.height)) / np.array(part.semi_axes)
            # Facets sit inside their own ellipsoid, so allow for the chord sag.
            buried += int(np.sum(np.einsum('ij,ij->i', scaled, scaled) < 0.9))
        self.assertEqual(0, buried)

    def test_normals_point_outwards(self) -> None:
        points = self.model.samples.points
        normals = self.model.normals
        outward = np.zeros(len(points), dtype=bool)
        for part in HUMANOID_PARTS:
            offset = points - part.centre(COUCH.height)
            outward |= np.einsum('ij,ij->i', offset, normals) > 0
        self.assertTrue(np.all(outward))

    def test_scales_with_height(self) -> None:
        small = make_supine_humanoid(COUCH, 0.05, seed=4, height=1.5)
        self.assertLess(
            np.ptp(small.samples.points[:, 0]),
            np.ptp(self.model.samples.points[:, 0]),
        )

    def test_is_surface_model(self) -> None:
        self.assertIsInstance(self.model, SurfaceModel)
        self.assertEqual('humanoid', self.model.name)
        self.assertEqual(0.05, self.model.resolution)
