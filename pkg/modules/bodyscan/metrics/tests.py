#!/usr/bin/env python

import math
import tempfile
import unittest
from typing import List, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from .curve import (
    evaluate_scan,
    coverage_curve,
    CoverageReport,
    EXTERNAL_REFERENCE,
    GROUND_TRUTH_SAMPLES,
)
from ..robot import BasePose, ArmConfig
from .report import (
    report_table,
    REPORT_COLUMNS,
    read_report_csv,
    write_report_csv,
    plot_coverage_svg,
    format_report_text,
)
from ..bodies import CouchSpec, SurfaceModel, model_from_mesh, make_half_cylinder
from ..cspace import ConfigRecord, ConfigDictionary
from ..errors import EmptyReference
from ..sensor import CameraModel
from ..planner import greedy_select
from .coverage import coverage, mean_surface_distance
from ..geometry import Pose, PointCloud, TriangleMesh, look_rotation

COUCH = CouchSpec()
CAMERA = CameraModel()


def looking_at(position: Sequence[float], target: Sequence[float]) -> Pose:
    position_array = np.asarray(position, dtype=float)
    return Pose.from_rotation(
        look_rotation(np.asarray(target, dtype=float) - position_array),
        position_array,
    )


def flat_grid(side: int, spacing: float, z: float = 0.) -> PointCloud:
    xs, ys = np.meshgrid(np.arange(side) * spacing, np.arange(side) * spacing)
    return PointCloud(np.column_stack((xs.ravel(), ys.ravel(), np.full(side * side, z))))


def dictionary_of(cameras: List[Pose], n_samples: int) -> ConfigDictionary:
    """Single-view bases at the given camera poses, each seeing a distinct sample."""
    bases = tuple(BasePose(float(i), 3., 0.) for i in range(len(cameras)))
    records = tuple(
        ConfigRecord(
            base=base,
            arm=ArmConfig.zero(),
            camera=camera,
            visible=np.array([i % n_samples], dtype=np.int64),
        )
        for i, (base, camera) in enumerate(zip(bases, cameras))
    )
    return ConfigDictionary(
        bases=bases,
        records=records,
        base_of=tuple(range(len(cameras))),
        model_resolution=0.1,
        n_samples=n_samples,
        analysis_time_per_base=0.,
        params_hash='test',
    )


class CoverageTests(unittest.TestCase):
    def test_scan_equals_reference(self) -> None:
        reference = flat_grid(20, 0.01)
        self.assertEqual(100., coverage(reference, reference, 0.01))

    def test_empty_scan(self) -> None:
        self.assertEqual(0., coverage(PointCloud.empty(), flat_grid(5, 0.01), 0.01))

    def test_line_with_gap(self) -> None:
        line = np.column_stack((np.arange(100) * 0.05, np.zeros(100), np.zeros(100)))
        reference = PointCloud(line)
        scan = PointCloud(np.delete(line, np.arange(40, 65), axis=0))

        self.assertAlmostEqual(75., coverage(scan, reference, 0.01))

    def test_threshold_is_inclusive(self) -> None:
        reference = PointCloud([(0., 0., 0.)])
        scan = PointCloud([(0.0, 0.0, 0.02)])
        self.assertEqual(100., coverage(scan, reference, 0.01))

    def test_empty_reference(self) -> None:
        with self.assertRaises(EmptyReference):
            coverage(flat_grid(3, 0.01), PointCloud.empty(), 0.01)

    def test_adding_points_never_lowers_coverage(self) -> None:
        rng = np.random.default_rng(1)
        reference = PointCloud(rng.uniform(0, 0.5, size=(400, 3)))
        extra = rng.uniform(0, 0.5, size=(400, 3))
        previous = 0.
        for count in range(0, 401, 50):
            with self.subTest(count=count):
                value = coverage(PointCloud(extra[:count]), reference, 0.02)
                self.assertGreaterEqual(value, previous)
                previous = value

    def test_monotone_in_voxel(self) -> None:
        rng = np.random.default_rng(2)
        reference = PointCloud(rng.uniform(0, 1, size=(300, 3)))
        scan = PointCloud(rng.uniform(0, 1, size=(300, 3)))
        values = [coverage(scan, reference, v) for v in (0.005, 0.01, 0.02, 0.05, 0.1)]
        self.assertEqual(sorted(values), values)

    def test_bad_voxel(self) -> None:
        with self.assertRaises(ValueError):
            coverage(flat_grid(3, 0.01), flat_grid(3, 0.01), 0.)


class MeanSurfaceDistanceTests(unittest.TestCase):
    def test_identical(self) -> None:
        cloud = flat_grid(10, 0.01)
        self.assertEqual(0., mean_surface_distance(cloud, cloud))

    def test_offset_plane(self) -> None:
        reference = flat_grid(30, 0.01)
        scan = flat_grid(30, 0.01, z=0.003)
        distance = mean_surface_distance(scan, reference)
        self.assertAlmostEqual(0.003, distance, delta=0.003 * 0.01)

    def test_directed_from_scan(self) -> None:
        reference = flat_grid(30, 0.01)
        scan = reference.select(np.arange(10))
        # Every scan point lies on the reference, though most of it is unscanned.
        self.assertEqual(0., mean_surface_distance(scan, reference))

    def test_empty_inputs(self) -> None:
        cloud = flat_grid(3, 0.01)
        with self.assertRaises(EmptyReference):
            mean_surface_distance(cloud, PointCloud.empty())
        with self.assertRaises(ValueError):
            mean_surface_distance(PointCloud.empty(), cloud)


class CoverageCurveTests(unittest.TestCase):
    patch: SurfaceModel
    cylinder: SurfaceModel

    @classmethod
    def setUpClass(cls) -> None:
        z = COUCH.height + 0.1
        mesh = TriangleMesh(
            [(-0.1, -0.1, z), (0.1, -0.1, z), (0.1, 0.1, z), (-0.1, 0.1, z)],
            [(0, 1, 2), (0, 2, 3)],
        )
        cls.patch = model_from_mesh('patch', mesh, COUCH, 0.01, seed=0)
        cls.cylinder = make_half_cylinder(1.75, 0.2, COUCH, 0.02)

    def test_single_view_covering_everything(self) -> None:
        top = COUCH.height + 0.1
        camera = looking_at((0., 0., top + 0.8), (0., 0., top))
        dictionary = dictionary_of([camera], n_samples=1)
        plan = greedy_select(dictionary)

        report = coverage_curve(dictionary, plan, self.patch, CAMERA)

        self.assertEqual((100.,), report.per_stage_coverage)
        self.assertEqual(100., report.coverage_pct)
        self.assertTrue(math.isnan(report.mean_distance))
        self.assertEqual(GROUND_TRUTH_SAMPLES, report.reference_kind)

    def test_stages_accumulate(self) -> None:
        apex = COUCH.height + 0.2
        cameras = [
            looking_at((0.6, 1.0, apex + 0.4), (0.6, 0., apex)),
            looking_at((-0.6, -1.0, apex + 0.4), (-0.6, 0., apex)),
            looking_at((0., 0., apex + 0.9), (0., 0., apex)),
        ]
        explorative = looking_at((2.5, 0., apex + 0.3), (0., 0., apex))
        dictionary = dictionary_of(cameras, n_samples=3)
        plan = greedy_select(dictionary, max_bases=3)

        report = coverage_curve(dictionary, plan, self.cylinder, CAMERA, explorative)

        self.assertEqual(4, len(report.per_stage_coverage))
        self.assertTrue(report.explorative)
        self.assertEqual(
            sorted(report.per_stage_coverage),
            list(report.per_stage_coverage),
            "Coverage must not drop between stages",
        )
        self.assertGreater(report.per_stage_coverage[-1], report.per_stage_coverage[0])
        self.assertLessEqual(report.per_stage_coverage[-1], 100.)
        self.assertEqual(
            ['explorative', '+1 base', '+2 bases', '+3 bases'],
            report.stage_labels(),
        )

    def test_reference_is_stripped(self) -> None:
        camera = looking_at((0., 0., COUCH.height + 1.1), (0., 0., COUCH.height))
        dictionary = dictionary_of([camera], n_samples=1)
        plan = greedy_select(dictionary)

        report = coverage_curve(dictionary, plan, self.cylinder, CAMERA)

        self.assertLess(report.n_reference_points, len(self.cylinder.samples))

    def test_realised_coverage_from_scan(self) -> None:
        top = COUCH.height + 0.1
        camera = looking_at((0., 0., top + 0.8), (0., 0., top))
        dictionary = dictionary_of([camera], n_samples=1)
        plan = greedy_select(dictionary)

        report = coverage_curve(
            dictionary,
            plan,
            self.patch,
            CAMERA,
            scan=self.patch.samples,
        )

        self.assertEqual(100., report.coverage_pct)
        self.assertEqual(0., report.mean_distance)

    def test_mismatched_plan(self) -> None:
        camera = looking_at((0., 0., 2.), (0., 0., 0.))
        plan = greedy_select(dictionary_of([camera], n_samples=1))
        with self.assertRaises(ValueError):
            coverage_curve(dictionary_of([camera], n_samples=5), plan, self.patch, CAMERA)


class EvaluateScanTests(unittest.TestCase):
    def test_external_reference(self) -> None:
        reference = flat_grid(10, 0.01)
        scan = flat_grid(10, 0.01, z=0.001)

        report = evaluate_scan(scan, reference)

        self.assertEqual(EXTERNAL_REFERENCE, report.reference_kind)
        self.assertEqual(100., report.coverage_pct)
        self.assertAlmostEqual(0.001, report.mean_distance)
        self.assertEqual((), report.per_stage_coverage)
        self.assertEqual(100, report.n_reference_points)


class ReportOutputTests(unittest.TestCase):
    report = CoverageReport(
        coverage_pct=93.5,
        mean_distance=0.0061,
        per_stage_coverage=(40., 75.25, 92., 96.5),
        reference_kind=GROUND_TRUTH_SAMPLES,
        voxel=0.01,
        n_reference_points=12345,
        explorative=True,
        plan_time=320.,
        travel_distance=4.5,
    )

    def test_table(self) -> None:
        table = report_table(self.report)

        self.assertEqual(REPORT_COLUMNS, list(table.columns))
        self.assertEqual(
            ['explorative', '+1 base', '+2 bases', '+3 bases', 'scan'],
            table['stage'].tolist(),
        )
        self.assertEqual([40., 75.25, 92., 96.5, 93.5], table['coverage_pct'].tolist())
        self.assertAlmostEqual(6.1, table['mean_distance_mm'].iloc[-1])
        self.assertEqual(320., table['plan_time_s'].iloc[-1])

    def test_csv_round_trip(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'report.csv'
            write_report_csv(path, self.report)
            table = pd.read_csv(path)
            text = path.read_text()

        self.assertEqual(REPORT_COLUMNS, list(table.columns))
        self.assertEqual(5, len(table))
        self.assertIn('explorative,40.0000', text)

    def test_read_back(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'report.csv'
            write_report_csv(path, self.report)
            report = read_report_csv(path)

        self.assertEqual(self.report.per_stage_coverage, report.per_stage_coverage)
        self.assertTrue(report.explorative)
        self.assertEqual(GROUND_TRUTH_SAMPLES, report.reference_kind)
        self.assertEqual(12345, report.n_reference_points)
        self.assertAlmostEqual(self.report.mean_distance, report.mean_distance)
        self.assertEqual(format_report_text(self.report), format_report_text(report))

    def test_read_rejects_other_tables(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'gains.csv'
            path.write_text('stop,view,gain\n0,0,12\n')
            with self.assertRaises(ValueError):
                read_report_csv(path)

    def test_text(self) -> None:
        text = format_report_text(self.report)

        self.assertIn('coverage: 93.50 %', text)
        self.assertIn('mean distance: 6.10 mm', text)
        self.assertIn('estimated time: 320 s', text)
        self.assertIn('+3 bases', text)
        self.assertIn('75.25', text)

    def test_text_without_stages(self) -> None:
        report = self.report._replace(
            per_stage_coverage=(),
            explorative=False,
            mean_distance=math.nan,
        )
        text = format_report_text(report)
        self.assertNotIn('mean distance', text)
        self.assertNotIn('+1 base', text)

    def test_svg_is_reproducible(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            first = Path(directory) / 'first.svg'
            second = Path(directory) / 'second.svg'
            plot_coverage_svg(first, self.report)
            plot_coverage_svg(second, self.report)

            content = first.read_bytes()
            self.assertEqual(content, second.read_bytes())

        self.assertIn(b'<svg', content)


if __name__ == '__main__':
    unittest.main()
