#!/usr/bin/env python

import math
import tempfile
import unittest
from typing import List, Tuple, Optional
from pathlib import Path

import numpy as np

from .ply import read_ply, write_ply, read_ply_mesh, write_ply_mesh
from .grid import OccupancyGrid
from .mesh import (
    TriangleMesh,
    segments_occluded,
    ray_mesh_intersect,
    segments_cross_mesh,
)
from .pose import Pose, compose, inverse, FloatArray, look_rotation, rotation_about_z
from .clouds import PointCloud, NeighborIndex, nearest_neighbor, voxel_downsample
from ..errors import EmptyTarget, PlyFormatError
from .footprint import Rectangle, footprint_corners, polygon_overlaps_rectangle

Vector3 = Tuple[float, float, float]


def random_pose(rng: np.random.Generator) -> Pose:
    return Pose.from_rotvec(rng.normal(size=3), rng.uniform(-2, 2, size=3))


def square_mesh(size: float = 1., z: float = 0.) -> TriangleMesh:
    half = size / 2
    return TriangleMesh(
        [(-half, -half, z), (half, -half, z), (half, half, z), (-half, half, z)],
        [(0, 1, 2), (0, 2, 3)],
    )


def box_mesh(low: Vector3, high: Vector3) -> TriangleMesh:
    (x0, y0, z0), (x1, y1, z1) = low, high
    vertices = [
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ]
    triangles = [
        (0, 2, 1), (0, 3, 2),  # bottom
        (4, 5, 6), (4, 6, 7),  # top
        (0, 1, 5), (0, 5, 4),
        (1, 2, 6), (1, 6, 5),
        (2, 3, 7), (2, 7, 6),
        (3, 0, 4), (3, 4, 7),
    ]
    return TriangleMesh(vertices, triangles)


def brute_force_hit(
    origin: FloatArray,
    direction: FloatArray,
    mesh: TriangleMesh,
) -> Optional[float]:
    best = None
    for a, b, c in mesh.vertices[mesh.triangles]:
        edge1, edge2 = b - a, c - a
        p = np.cross(direction, edge2)
        det = float(np.dot(edge1, p))
        if abs(det) < 1e-12:
            continue
        s = origin - a
        u = float(np.dot(s, p)) / det
        q = np.cross(s, edge1)
        v = float(np.dot(direction, q)) / det
        t = float(np.dot(edge2, q)) / det
        if u >= 0 and v >= 0 and u + v <= 1 and t > 1e-6:
            best = t if best is None else min(best, t)
    return best


class PoseTests(unittest.TestCase):
    def assertPoseClose(self, expected: Pose, actual: Pose, tolerance: float = 1e-9) -> None:
        self.assertLessEqual(expected.angle_to(actual), tolerance, f"{expected} != {actual}")
        distance = expected.distance_to(actual)
        self.assertLessEqual(distance, tolerance, f"{expected} != {actual}")

    def test_compose_identities(self) -> None:
        self.assertPoseClose(Pose.identity(), compose(Pose.identity(), Pose.identity()))

    def test_compose_with_inverse(self) -> None:
        rng = np.random.default_rng(1)
        for _ in range(20):
            pose = random_pose(rng)
            with self.subTest(pose=pose):
                self.assertPoseClose(Pose.identity(), compose(pose, inverse(pose)))
                self.assertPoseClose(Pose.identity(), compose(inverse(pose), pose))

    def test_quarter_turns(self) -> None:
        quarter = rotation_about_z(math.pi / 2)
        result = compose(quarter, quarter).apply((1, 0, 0))
        np.testing.assert_allclose(result, (-1, 0, 0), atol=1e-9)

    def test_compose_applies_right_operand_first(self) -> None:
        shift = Pose.from_translation((1, 0, 0))
        quarter = rotation_about_z(math.pi / 2)

        np.testing.assert_allclose(
            compose(quarter, shift).apply((0, 0, 0)),
            (0, 1, 0),
            atol=1e-12,
        )
        np.testing.assert_allclose(
            compose(shift, quarter).apply((0, 0, 0)),
            (1, 0, 0),
            atol=1e-12,
        )

    def test_associative(self) -> None:
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b, c = random_pose(rng), random_pose(rng), random_pose(rng)
            with self.subTest(a=a, b=b, c=c):
                self.assertPoseClose(compose(compose(a, b), c), compose(a, compose(b, c)))

    def test_matrix_export(self) -> None:
        rng = np.random.default_rng(3)
        for _ in range(10):
            pose = random_pose(rng)
            with self.subTest(pose=pose):
                matrix = pose.matrix()
                self.assertAlmostEqual(1, np.linalg.det(matrix[:3, :3]), places=9)
                self.assertAlmostEqual(1, float(np.linalg.norm(pose.quaternion)), places=9)
                self.assertPoseClose(pose, Pose.from_matrix(matrix))
                point = rng.normal(size=3)
                np.testing.assert_allclose(
                    (matrix @ np.append(point, 1))[:3],
                    pose.apply(point),
                    atol=1e-12,
                )

    def test_rotation_angle_of_tiny_rotations(self) -> None:
        for angle in (0., 1e-12, 1e-8, 0.5, math.pi):
            with self.subTest(angle=angle):
                pose = Pose.from_rotvec((0., angle, 0.))
                tolerance = 1e-15 + angle * 1e-12
                self.assertAlmostEqual(angle, pose.rotation_angle(), delta=tolerance)

    def test_rejects_zero_quaternion(self) -> None:
        with self.assertRaises(ValueError):
            Pose((0, 0, 0, 0))

    def test_rejects_non_finite_values(self) -> None:
        nan, inf = float('nan'), float('inf')
        builders = {
            'nan translation': lambda: Pose.from_translation((nan, 0., 0.)),
            'infinite translation': lambda: Pose.from_translation((0., inf, 0.)),
            'nan quaternion': lambda: Pose((nan, 0., 0., 1.)),
            'nan matrix': lambda: Pose.from_matrix(np.full((4, 4), nan)),
        }
        for name, build in builders.items():
            with self.subTest(name):
                with self.assertRaises(ValueError):
                    build()

    def test_look_rotation_is_right_handed(self) -> None:
        for forward in ((0, 0, -1), (1, 0, 0), (0.3, -0.4, -0.8), (0, 0, 1)):
            with self.subTest(forward=forward):
                matrix = look_rotation(forward).as_matrix()
                expected = np.array(forward) / np.linalg.norm(forward)
                np.testing.assert_allclose(matrix[:, 2], expected, atol=1e-12)
                self.assertAlmostEqual(1, np.linalg.det(matrix), places=12)
                self.assertAlmostEqual(0, matrix[2, 0], places=12, msg="x axis not horizontal")


class VoxelDownsampleTests(unittest.TestCase):
    def test_merges_close_points(self) -> None:
        cloud = PointCloud([(0.002, 0.002, 0.002), (0.003, 0.002, 0.002)])
        result = voxel_downsample(cloud, 0.01)
        self.assertEqual(1, len(result))
        np.testing.assert_allclose(result.points[0], (0.0025, 0.002, 0.002))

    def test_keeps_distant_points(self) -> None:
        cloud = PointCloud([(0.002, 0.002, 0.002), (1.002, 0.002, 0.002)])
        result = voxel_downsample(cloud, 0.01)
        np.testing.assert_allclose(result.points, cloud.points)

    def test_random_cube_matches_counting_oracle(self) -> None:
        rng = np.random.default_rng(4)
        points = rng.uniform(0, 1, size=(100_000, 3))
        result = voxel_downsample(PointCloud(points), 0.1)

        occupied = {tuple(key) for key in np.floor(points / 0.1).astype(int)}
        self.assertLessEqual(len(result), 1000)
        self.assertEqual(len(occupied), len(result))

    def test_idempotent(self) -> None:
        rng = np.random.default_rng(5)
        cloud = PointCloud(rng.normal(size=(5000, 3)))
        once = voxel_downsample(cloud, 0.2)
        twice = voxel_downsample(once, 0.2)
        self.assertEqual(len(once), len(twice))

    def test_normals_are_averaged_and_renormalised(self) -> None:
        root_half = math.sqrt(0.5)
        cloud = PointCloud(
            [(0.001, 0.001, 0.001), (0.002, 0.001, 0.001)],
            normals=[(1, 0, 0), (root_half, root_half, 0)],
            colors=[(1, 0, 0), (0, 0, 1)],
        )
        result = voxel_downsample(cloud, 0.01)

        assert result.normals is not None
        assert result.colors is not None
        self.assertAlmostEqual(1, float(np.linalg.norm(result.normals[0])), places=9)
        self.assertGreater(result.normals[0][0], result.normals[0][1])
        np.testing.assert_allclose(result.colors[0], (0.5, 0, 0.5))

    def test_empty_cloud(self) -> None:
        self.assertEqual(0, len(voxel_downsample(PointCloud.empty(), 0.01)))

    def test_rejects_non_positive_voxel(self) -> None:
        with self.assertRaises(ValueError):
            voxel_downsample(PointCloud([(0, 0, 0)]), 0)


class PointCloudTests(unittest.TestCase):
    def test_rejects_non_finite(self) -> None:
        with self.assertRaises(ValueError):
            PointCloud([(0, 0, math.nan)])

    def test_rejects_non_unit_normals(self) -> None:
        with self.assertRaises(ValueError):
            PointCloud([(0, 0, 0)], normals=[(0, 0, 2)])

    def test_rejects_mismatched_normals(self) -> None:
        with self.assertRaises(ValueError):
            PointCloud([(0, 0, 0), (1, 0, 0)], normals=[(0, 0, 1)])

    def test_transform_moves_normals(self) -> None:
        cloud = PointCloud([(1, 0, 0)], normals=[(1, 0, 0)])
        moved = cloud.transformed(rotation_about_z(math.pi / 2, (0, 0, 1)))

        assert moved.normals is not None
        np.testing.assert_allclose(moved.points, [(0, 1, 1)], atol=1e-12)
        np.testing.assert_allclose(moved.normals, [(0, 1, 0)], atol=1e-12)


class NearestNeighborTests(unittest.TestCase):
    def test_query_on_cloud_point(self) -> None:
        cloud = PointCloud([(0, 0, 0), (1, 2, 3), (4, 5, 6)])
        self.assertEqual((1, 0.), nearest_neighbor((1, 2, 3), cloud))

    def test_tie_breaks_to_lowest_index(self) -> None:
        cloud = PointCloud([
            (5, 5, 5), (6, 6, 6), (1, 0, 0), (7, 7, 7), (8, 8, 8), (-1, 0, 0),
        ])
        index, distance = nearest_neighbor((0, 0, 0), cloud)
        self.assertEqual(2, index)
        self.assertEqual(1, distance)

    def test_matches_linear_scan(self) -> None:
        rng = np.random.default_rng(6)
        for cloud_number in range(10):
            points = rng.uniform(-1, 1, size=(1000, 3))
            index = NeighborIndex(points)
            for query in rng.uniform(-1.5, 1.5, size=(100, 3)):
                distances = np.linalg.norm(points - query, axis=1)
                with self.subTest(cloud=cloud_number, query=query):
                    found, distance = index.nearest(query)
                    self.assertEqual(int(np.argmin(distances)), found)
                    self.assertAlmostEqual(float(distances.min()), distance, places=12)

    def test_empty_target(self) -> None:
        with self.assertRaises(EmptyTarget):
            nearest_neighbor((0, 0, 0), PointCloud.empty())

    def test_batched_query_respects_limit(self) -> None:
        index = NeighborIndex([(0, 0, 0), (1, 0, 0)])
        distances, indices = index.query([(0.1, 0, 0), (5, 0, 0)], max_distance=0.5)

        self.assertEqual(0, indices[0])
        self.assertAlmostEqual(0.1, distances[0])
        self.assertTrue(np.isinf(distances[1]))


class RayMeshTests(unittest.TestCase):
    def test_hits_square_from_above(self) -> None:
        result = ray_mesh_intersect((0, 0, 1), (0, 0, -1), square_mesh())
        assert result is not None
        t, _ = result
        self.assertAlmostEqual(1, t, places=12)

    def test_ray_pointing_away(self) -> None:
        self.assertIsNone(ray_mesh_intersect((0, 0, 1), (0, 0, 1), square_mesh()))

    def test_matches_per_triangle_brute_force(self) -> None:
        rng = np.random.default_rng(7)
        mesh = square_mesh(2.)
        hits = 0
        for _ in range(500):
            origin = rng.uniform(-2, 2, size=3)
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)

            expected = brute_force_hit(origin, direction, mesh)
            actual = ray_mesh_intersect(origin, direction, mesh)
            with self.subTest(origin=origin, direction=direction):
                if expected is None:
                    self.assertIsNone(actual)
                else:
                    hits += 1
                    assert actual is not None
                    self.assertAlmostEqual(expected, actual[0], places=9)
        self.assertGreater(hits, 20, "Too few hits for a meaningful comparison")

    def test_returns_nearest_of_several_hits(self) -> None:
        mesh = box_mesh((-1, -1, -1), (1, 1, 1))
        result = ray_mesh_intersect((0, 0, 5), (0, 0, -1), mesh)
        assert result is not None
        self.assertAlmostEqual(4, result[0], places=12)

    def test_rejects_degenerate_triangles(self) -> None:
        with self.assertRaises(ValueError):
            TriangleMesh([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)])

    def test_rejects_bad_indices(self) -> None:
        with self.assertRaises(ValueError):
            TriangleMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 3)])

    def test_segments_occluded_matches_single_rays(self) -> None:
        rng = np.random.default_rng(8)
        mesh = box_mesh((-0.5, -0.5, 0), (0.5, 0.5, 0.4))
        origin = np.array((0.3, -1.5, 1.2))
        targets = rng.uniform(-1, 1, size=(300, 3)) * (1, 1, 0.5) + (0, 0, 0.3)

        occluded = segments_occluded(origin, targets, mesh, tolerance=0.005)

        for target, flag in zip(targets, occluded):
            offset = target - origin
            length = float(np.linalg.norm(offset))
            hit = ray_mesh_intersect(origin, offset / length, mesh)
            expected = hit is not None and hit[0] < length - 0.005
            with self.subTest(target=target):
                self.assertEqual(expected, bool(flag))

    def test_segments_cross_mesh(self) -> None:
        mesh = box_mesh((-0.5, -0.5, 0), (0.5, 0.5, 0.4))
        cases = {
            'through': ((0., -1., 0.2), (0., 1., 0.2), True),
            'into': ((0., 0., 1.), (0., 0., 0.2), True),
            'short of': ((0., 0., 1.), (0., 0., 0.5), False),
            'beside': ((1., -1., 0.2), (1., 1., 0.2), False),
            'above': ((-1., 0., 0.6), (1., 0., 0.6), False),
        }
        starts = np.array([start for start, _, _ in cases.values()])
        ends = np.array([end for _, end, _ in cases.values()])
        crossed = segments_cross_mesh(starts, ends, mesh)
        for (name, (_, _, expected)), flag in zip(cases.items(), crossed):
            with self.subTest(name):
                self.assertEqual(expected, bool(flag))


class OccupancyGridTests(unittest.TestCase):
    def test_world_cell_round_trip(self) -> None:
        grid = OccupancyGrid((-1.05, 2.3), 0.1, np.zeros((40, 30)))
        rng = np.random.default_rng(9)
        for _ in range(100):
            cell = (int(rng.integers(0, 40)), int(rng.integers(0, 30)))
            with self.subTest(cell=cell):
                self.assertEqual(cell, grid.world_to_cell(*grid.cell_to_world(cell)))

    def test_nearest_free_cell(self) -> None:
        cells = np.ones((5, 5), dtype=bool)
        cells[4, 1] = False
        cells[0, 0] = False
        grid = OccupancyGrid((0, 0), 1, cells)
        self.assertEqual((4, 1), grid.nearest_free_cell((3, 2)))
        self.assertEqual((0, 0), grid.nearest_free_cell((-3, -3)))

    def test_rejects_bad_cell_size(self) -> None:
        with self.assertRaises(ValueError):
            OccupancyGrid((0, 0), 0, np.zeros((2, 2)))


class FootprintTests(unittest.TestCase):
    def test_rectangle_overlap(self) -> None:
        couch = Rectangle.centred(2, 0.7)
        cases: List[Tuple[Rectangle, bool]] = [
            (Rectangle(0.9, 0.3, 1.5, 1.0), True),
            (Rectangle(1.0, 0.0, 1.5, 1.0), False),  # touching edge
            (Rectangle(-5, -5, 5, 5), True),
            (Rectangle(3, 3, 4, 4), False),
        ]
        for other, expected in cases:
            with self.subTest(other=other):
                self.assertEqual(expected, couch.overlaps(other))
                self.assertEqual(expected, other.overlaps(couch))

    def test_rotated_footprint_overlap(self) -> None:
        couch = Rectangle.centred(2, 0.7)

        beside = footprint_corners(0, 0.7, -math.pi / 2, 0.4, 0.5)
        self.assertFalse(polygon_overlaps_rectangle(beside, couch))

        on_top = footprint_corners(0, 0, 0.3, 0.4, 0.5)
        self.assertTrue(polygon_overlaps_rectangle(on_top, couch))

        # A diagonal footprint off the corner whose bounding box overlaps the couch.
        corner = footprint_corners(1.17, 0.52, math.pi / 4, 0.4, 0.4)
        low, high = corner.min(axis=0), corner.max(axis=0)
        self.assertTrue(couch.overlaps(Rectangle(low[0], low[1], high[0], high[1])))
        self.assertFalse(polygon_overlaps_rectangle(corner, couch))

    def test_footprint_depth_along_heading(self) -> None:
        corners = footprint_corners(0, 0, 0, width=0.4, depth=0.5)
        np.testing.assert_allclose(corners.max(axis=0), (0.25, 0.2))
        np.testing.assert_allclose(corners.min(axis=0), (-0.25, -0.2))


class PlyTests(unittest.TestCase):
    def test_cloud_round_trip(self) -> None:
        rng = np.random.default_rng(10)
        normals = rng.normal(size=(20, 3))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        cloud = PointCloud(
            rng.normal(size=(20, 3)),
            normals,
            rng.integers(0, 256, size=(20, 3)) / 255,
        )
        with tempfile.TemporaryDirectory() as temp_dir:
            for file_format in ('ascii', 'binary_little_endian'):
                with self.subTest(file_format=file_format):
                    path = Path(temp_dir) / f'{file_format}.ply'
                    write_ply(path, cloud, file_format)
                    loaded = read_ply(path)

                    assert loaded.normals is not None
                    assert loaded.colors is not None
                    assert cloud.normals is not None
                    assert cloud.colors is not None
                    np.testing.assert_allclose(loaded.points, cloud.points, atol=1e-12)
                    np.testing.assert_allclose(loaded.normals, cloud.normals, atol=1e-12)
                    np.testing.assert_allclose(loaded.colors, cloud.colors, atol=1e-12)

    def test_mesh_round_trip(self) -> None:
        mesh = box_mesh((0, 0, 0), (1, 2, 3))
        with tempfile.TemporaryDirectory() as temp_dir:
            for file_format in ('ascii', 'binary_little_endian'):
                with self.subTest(file_format=file_format):
                    path = Path(temp_dir) / 'box.ply'
                    write_ply_mesh(path, mesh, file_format)
                    loaded = read_ply_mesh(path)
                    np.testing.assert_array_equal(mesh.triangles, loaded.triangles)
                    np.testing.assert_allclose(mesh.vertices, loaded.vertices)

    def test_reads_quads_as_triangles(self) -> None:
        text = '\n'.join([
            'ply',
            'format ascii 1.0',
            'comment written by hand',
            'element vertex 4',
            'property float x',
            'property float y',
            'property float z',
            'element face 1',
            'property list uchar int vertex_indices',
            'end_header',
            '0 0 0', '1 0 0', '1 1 0', '0 1 0',
            '4 0 1 2 3',
        ]) + '\n'
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / 'quad.ply'
            path.write_text(text)
            mesh = read_ply_mesh(path)
        self.assertEqual([[0, 1, 2], [0, 2, 3]], mesh.triangles.tolist())

    def test_rejects_non_ply(self) -> None:
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / 'bad.ply'
            path.write_text('solid not-a-ply\n')
            with self.assertRaises(PlyFormatError):
                read_ply(path)


if __name__ == '__main__':
    unittest.main()
