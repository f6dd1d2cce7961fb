#!/usr/bin/env python

import io
import json
import math
import tempfile
import unittest
import contextlib
from typing import Dict, List, Tuple, Mapping
from pathlib import Path

import numpy as np

from . import cli
from .sweep import run_sweep
from ..robot import BasePose, base_fits
from .config import (
    DEFAULTS,
    check_value,
    dump_config,
    load_config,
    parse_config,
)
from .runner import (
    Prepared,
    plan_scan,
    write_run,
    random_start,
    run_workflow,
    WorkflowResult,
    expected_report,
    run_monte_carlo,
    analyze_scenario,
    explorative_camera,
)
from ..bodies import make_half_cylinder
from ..errors import ConfigError, DictionaryMismatch
from ..metrics import read_report_csv, write_report_csv
from .scenario import (
    build_scenario,
    planning_model,
    ScenarioConfig,
    reference_model,
)
from ..geometry import write_ply, PointCloud

# A coarse scenario which analyses, plans and scans in seconds.
SMALL: Mapping[str, object] = {
    'resolution': 0.2,
    'evaluation.resolution': 0.02,
    'analysis.standoffs': [0.45],
    'analysis.spacing': 0.8,
    'analysis.target_spacing_factor': 2.0,
    'budgets.max_bases': 2,
    'budgets.max_views': 3,
    'stitch.voxel': 0.02,
    'stitch.outlier_k': 8,
}


def small_config(**changes: object) -> Dict[str, object]:
    config = dict(DEFAULTS)
    config.update(SMALL)
    config.update(changes)
    return config


def config_text(config: Mapping[str, object]) -> str:
    lines = ['{} = {}'.format(k, json.dumps(v)) for k, v in config.items() if k in SMALL]
    return 'version = 1\n' + '\n'.join(lines) + '\n'


def run_cli(*argv: str) -> Tuple[int, str, str]:
    stdout = io.StringIO()
    stderr = io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        try:
            cli.main(list(argv))
        except SystemExit as e:
            code = e.code
        else:
            raise AssertionError("The command line should always exit explicitly")
    assert isinstance(code, int)
    return code, stdout.getvalue(), stderr.getvalue()


class ConfigTests(unittest.TestCase):
    def test_defaults_without_file(self) -> None:
        self.assertEqual(dict(DEFAULTS), load_config())

    def test_parse_file(self) -> None:
        config = parse_config(
            '# a comment\n'
            'version = 1\n'
            'couch.height = 0.9  # raised\n'
            '\n'
            'workspace.kind = one_side\n'
            'budgets.max_bases = 2\n'
            'analysis.standoffs = [0.4, 0.6]\n',
        )
        self.assertEqual(
            {
                'version': 1,
                'couch.height': 0.9,
                'workspace.kind': 'one_side',
                'budgets.max_bases': 2,
                'analysis.standoffs': [0.4, 0.6],
            },
            config,
        )

    def test_integer_given_for_real_value(self) -> None:
        config = parse_config('version = 1\ncouch.height = 1\n')
        self.assertIsInstance(config['couch.height'], float)

    def test_rejected_files(self) -> None:
        cases = [
            ('couch.height = 0.9\n', "missing version"),
            ('version = 2\n', "unsupported version"),
            ('version = 1\nversion = 1\n', "duplicate key"),
            ('version = 1\ncouch.colour = "red"\n', "unknown key"),
            ('version = 1\ncouch.height = "high"\n', "wrong type"),
            ('version = 1\ncouch.height\n', "missing '='"),
            ('version = 1\nbudgets.max_bases = 2.5\n', "real for integer"),
            ('version = 1\nbudgets.max_bases = true\n', "boolean for integer"),
            ('version = 1\nworkspace.kind = garden\n', "not a choice"),
            ('version = 1\nrobot.dh_a = [0.1, 0.2]\n', "joint list too short"),
            ('version = 1\nanalysis.standoffs = []\n', "empty list"),
            ('version = 1\nbody.kind = [\n', "malformed value"),
        ]
        for text, description in cases:
            with self.subTest(description):
                with self.assertRaises(ConfigError):
                    parse_config(text)

    def test_error_names_location(self) -> None:
        with self.assertRaises(ConfigError) as context:
            parse_config('version = 1\n\ncouch.height = "high"\n', 'scan.cfg')
        self.assertIn('scan.cfg:3', str(context.exception))

    def test_layering(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'scan.cfg'
            path.write_text('version = 1\ncouch.height = 0.9\nbudgets.max_bases = 4\n')
            config = load_config(path, {'budgets.max_bases': 2})

        self.assertEqual(0.9, config['couch.height'], "File should override defaults")
        self.assertEqual(2, config['budgets.max_bases'], "Overrides should beat the file")
        self.assertEqual(DEFAULTS['couch.width'], config['couch.width'])

    def test_missing_file(self) -> None:
        with self.assertRaises(ConfigError):
            load_config(Path('/no/such/scan.cfg'))

    def test_bad_override(self) -> None:
        with self.assertRaises(ConfigError):
            load_config(overrides={'budgets.max_bases': 'many'})

    def test_dump_reads_back(self) -> None:
        config = small_config(**{'couch.height': 0.9, 'workspace.kind': 'narrow'})
        self.assertEqual(config, parse_config(dump_config(config)))

    def test_check_value_normalises_lists(self) -> None:
        self.assertEqual([0.0, 1.0], check_value('analysis.standoffs', [0, 1]))


class ScenarioTests(unittest.TestCase):
    def test_defaults(self) -> None:
        scenario = build_scenario(DEFAULTS)

        self.assertEqual('half_cylinder', scenario.body_kind)
        self.assertEqual(0.67, scenario.couch.height)
        self.assertEqual('full', scenario.workspace.kind)
        self.assertAlmostEqual(math.radians(75), scenario.camera.h_fov)
        self.assertEqual((3, 5), (scenario.max_bases, scenario.max_views))
        self.assertEqual((0, 1, 2), tuple(scenario.seeds))
        self.assertEqual((0.35, 0.55), scenario.analysis.standoffs)

    def test_one_side_workspace(self) -> None:
        scenario = build_scenario(small_config(**{
            'workspace.kind': 'one_side',
            'workspace.blocked_side': 'left',
        }))
        self.assertEqual(frozenset(('left',)), scenario.workspace.blocked_sides)

    def test_invalid_scenarios(self) -> None:
        cases: List[Tuple[str, object]] = [
            ('body.kind', 'mesh'),
            ('budgets.max_bases', 0),
            ('seeds.noise', -1),
            ('resolution', 0.),
            ('couch.height', -0.5),
            ('camera.min_range', 5.),
            ('analysis.workers', 0),
        ]
        for key, value in cases:
            with self.subTest(key=key, value=value):
                with self.assertRaises(ConfigError):
                    build_scenario(small_config(**{key: value}))

    def test_missing_key(self) -> None:
        config = small_config()
        del config['couch.height']
        with self.assertRaises(ConfigError):
            build_scenario(config)

    def test_planning_proxy(self) -> None:
        scenario = build_scenario(small_config(**{
            'body.kind': 'humanoid',
            'planning.proxy': 'half_cylinder',
        }))
        model = planning_model(scenario)
        proxy = make_half_cylinder(1.75, 0.2, scenario.couch, 0.2)
        self.assertEqual('half_cylinder', model.name)
        self.assertEqual(len(proxy.samples), len(model.samples))

    def test_reference_is_stripped(self) -> None:
        scenario = build_scenario(small_config())
        self.assertTrue(reference_model(scenario).stripped)


class StartPoseTests(unittest.TestCase):
    scenario: ScenarioConfig

    @classmethod
    def setUpClass(cls) -> None:
        cls.scenario = build_scenario(small_config())

    def test_random_start_fits(self) -> None:
        for seed in range(10):
            with self.subTest(seed=seed):
                start = random_start(self.scenario, seed)
                self.assertTrue(base_fits(
                    self.scenario.robot,
                    start,
                    self.scenario.couch,
                    self.scenario.workspace,
                ))

    def test_random_start_deterministic(self) -> None:
        self.assertEqual(random_start(self.scenario, 3), random_start(self.scenario, 3))
        self.assertNotEqual(random_start(self.scenario, 3), random_start(self.scenario, 4))

    def test_random_start_respects_workspace(self) -> None:
        scenario = build_scenario(small_config(**{'workspace.kind': 'narrow'}))
        region = scenario.workspace.free_region
        for seed in range(10):
            with self.subTest(seed=seed):
                start = random_start(scenario, seed)
                self.assertTrue(region.x_min <= start.x <= region.x_max)
                self.assertTrue(region.y_min <= start.y <= region.y_max)

    def test_explorative_camera_aims_at_couch_centre(self) -> None:
        start = BasePose(0., 1.2, -math.pi / 2)
        camera = explorative_camera(self.scenario, start)
        centre = np.array((0., 0., self.scenario.couch.height))

        towards = centre - camera.translation
        forward = camera.axis(2)
        self.assertAlmostEqual(1., float(forward @ towards / np.linalg.norm(towards)))
        self.assertGreater(
            camera.translation[2],
            self.scenario.couch.height,
            "Camera should be raised above the couch",
        )


class WorkflowTests(unittest.TestCase):
    scenario: ScenarioConfig
    prepared: Prepared
    result: WorkflowResult
    repeat: WorkflowResult
    directory: 'tempfile.TemporaryDirectory[str]'
    cache: Path

    @classmethod
    def setUpClass(cls) -> None:
        cls.directory = tempfile.TemporaryDirectory()
        cls.cache = Path(cls.directory.name) / 'dictionary.npz'
        cls.scenario = build_scenario(small_config())
        cls.prepared = analyze_scenario(cls.scenario, cls.cache)
        cls.result = run_workflow(cls.scenario, 'random', cls.prepared)
        cls.repeat = run_workflow(cls.scenario, 'random', cls.prepared)

    @classmethod
    def tearDownClass(cls) -> None:
        cls.directory.cleanup()

    def test_stages(self) -> None:
        report = self.result.report
        self.assertTrue(report.explorative)
        self.assertEqual(1 + len(self.result.plan.stops), len(report.per_stage_coverage))
        self.assertEqual(
            sorted(report.per_stage_coverage),
            list(report.per_stage_coverage),
            "Coverage must not drop between stages",
        )
        self.assertLessEqual(len(self.result.plan.stops), self.scenario.max_bases)

    def test_frames_follow_plan(self) -> None:
        self.assertEqual(
            [len(x.views) for x in self.result.plan.stops],
            [len(x) for x in self.result.frames_by_stop],
        )
        for stop, frames in zip(self.result.plan.stops, self.result.frames_by_stop):
            for view, frame in zip(stop.views, frames):
                commanded = frame.camera_pose_commanded
                self.assertTrue(view.camera.is_close(commanded, 1e-12, 1e-12))

    def test_paths_start_at_start(self) -> None:
        plan = self.result.plan
        self.assertEqual(len(plan.stops), len(plan.base_paths))
        first = plan.base_paths[0][0]
        # A start inside the inflated couch is snapped to the nearest free cell.
        snap = self.scenario.robot.footprint_radius() + 2 * self.scenario.grid_cell
        self.assertLess(
            math.hypot(first[0] - self.result.start.x, first[1] - self.result.start.y),
            snap,
        )

    def test_scan_quality(self) -> None:
        report = self.result.report
        self.assertGreater(report.coverage_pct, 0.)
        self.assertLessEqual(report.coverage_pct, 100.)
        self.assertLess(report.mean_distance, 0.02, "Stitched points should lie on the body")
        self.assertTrue(math.isfinite(report.plan_time))
        self.assertGreater(report.travel_distance, 0.)

    def test_deterministic(self) -> None:
        self.assertEqual(self.result.report, self.repeat.report)
        self.assertEqual(self.result.start, self.repeat.start)
        np.testing.assert_array_equal(
            self.result.stitch.cloud.points,
            self.repeat.stitch.cloud.points,
        )
        with tempfile.TemporaryDirectory() as directory:
            first = Path(directory) / 'first.csv'
            second = Path(directory) / 'second.csv'
            write_report_csv(first, self.result.report)
            write_report_csv(second, self.repeat.report)
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_given_start(self) -> None:
        start = BasePose(0., self.scenario.couch.width / 2 + 0.6, -math.pi / 2)
        planned = plan_scan(self.scenario, start, self.prepared)
        self.assertEqual(start, planned.start)

    def test_bad_start(self) -> None:
        with self.assertRaises(ValueError):
            plan_scan(self.scenario, 'anywhere', self.prepared)

    def test_expected_report_matches_stages(self) -> None:
        planned = plan_scan(self.scenario, 'random', self.prepared)
        expected = expected_report(self.scenario, planned)
        self.assertEqual(self.result.report.per_stage_coverage, expected.per_stage_coverage)
        self.assertTrue(math.isnan(expected.mean_distance))

    def test_write_run(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            out = Path(directory) / 'run'
            write_run(out, self.result, small_config())
            names = sorted(x.name for x in out.iterdir())
            frames = sorted(x.name for x in (out / 'frames').glob('*.ply'))
            report = read_report_csv(out / 'report.csv')

        self.assertEqual(
            [
                'corrections.csv',
                'coverage.svg',
                'effective-config.txt',
                'frames',
                'gains.csv',
                'plan.txt',
                'report.csv',
                'report.txt',
                'stitched.ply',
            ],
            names,
        )
        n_frames = 1 + sum(len(x) for x in self.result.frames_by_stop)
        self.assertEqual(['frame-{:03d}.ply'.format(x) for x in range(n_frames)], frames)
        self.assertEqual(self.result.report.per_stage_coverage, report.per_stage_coverage)

    def test_cache_reused(self) -> None:
        dictionary, _ = analyze_scenario(self.scenario, self.cache)
        self.assertEqual(self.prepared[0].params_hash, dictionary.params_hash)
        self.assertEqual(self.prepared[0].n_records, dictionary.n_records)

    def test_cache_mismatch(self) -> None:
        changed = build_scenario(small_config(**{'couch.height': 0.8}))
        with self.assertRaises(DictionaryMismatch):
            analyze_scenario(changed, self.cache)

    def test_monte_carlo(self) -> None:
        table = run_monte_carlo(self.scenario, 2, self.prepared)

        self.assertEqual(['0', '1', 'mean', 'std'], table['start'].tolist())
        self.assertIn('explorative', table.columns)
        first = table.iloc[0]
        self.assertEqual(self.result.start.x, first['x'], "Start 0 uses the base seeds")
        self.assertAlmostEqual(self.result.report.coverage_pct, first['coverage_pct'])
        self.assertAlmostEqual(
            table['coverage_pct'].iloc[:2].mean(),
            table['coverage_pct'].iloc[2],
        )

    def test_monte_carlo_needs_starts(self) -> None:
        with self.assertRaises(ValueError):
            run_monte_carlo(self.scenario, 0, self.prepared)

    def test_cli_simulate(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            config = Path(directory) / 'scan.cfg'
            config.write_text(config_text(small_config()))
            out = Path(directory) / 'run'

            code, stdout, stderr = run_cli(
                'simulate',
                '--config', str(config),
                '--dictionary', str(self.cache),
                '--out', str(out),
            )

            self.assertEqual(0, code, stderr)
            self.assertIn('coverage: {:.2f} %'.format(self.result.report.coverage_pct), stdout)
            self.assertTrue((out / 'stitched.ply').exists())
            self.assertIn('coverage:', (out / 'run-log.txt').read_text())
            written = (out / 'report.csv').read_bytes()

            code, stdout, stderr = run_cli('report', str(out), '--format', 'csv')
            self.assertEqual(0, code, stderr)
            self.assertEqual(written.decode(), stdout)
            self.assertTrue((out / 'run-log.txt').read_text(), "Run log should be kept")

    def test_cli_refuses_mismatched_cache(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            config = Path(directory) / 'scan.cfg'
            config.write_text(config_text(small_config()))

            code, _, stderr = run_cli(
                'plan',
                '--config', str(config),
                '--couch-height', '0.8',
                '--dictionary', str(self.cache),
                '--out', str(Path(directory) / 'run'),
            )

        self.assertEqual(1, code)
        self.assertIn('DictionaryMismatch', stderr)


class SweepTests(unittest.TestCase):
    def test_unknown_axis(self) -> None:
        for axis in ('couch.colour', 'version'):
            with self.subTest(axis=axis):
                with self.assertRaises(ConfigError):
                    run_sweep(small_config(), axis, [1.])

    def test_bad_value(self) -> None:
        with self.assertRaises(ConfigError):
            run_sweep(small_config(), 'couch.height', ['high'])

    def test_no_values(self) -> None:
        table = run_sweep(small_config(), 'couch.height', [])
        self.assertEqual(0, len(table))
        self.assertEqual(
            ['couch.height', 'n_configs', 't_bp_s', 'coverage_pct', 'mean_distance_mm',
             'plan_time_s'],
            list(table.columns),
        )

    def test_base_budget_sweep(self) -> None:
        table = run_sweep(small_config(), 'budgets.max_bases', [1, 2], analysis_only=True)

        self.assertEqual([1, 2], table['budgets.max_bases'].tolist())
        self.assertEqual(
            table['n_configs'].iloc[0],
            table['n_configs'].iloc[1],
            "The dictionary does not depend on the budget",
        )
        self.assertLessEqual(table['coverage_pct'].iloc[0], table['coverage_pct'].iloc[1])
        self.assertIn('+1 base', table.columns)


class CommandLineTests(unittest.TestCase):
    def test_dump_config(self) -> None:
        code, stdout, _ = run_cli(
            'simulate',
            '--dump-config',
            '--seed', '7',
            '--workspace', 'one-side',
            '--bases', '2',
        )

        self.assertEqual(0, code)
        config = parse_config(stdout)
        self.assertEqual(7, config['seeds.sampling'])
        self.assertEqual(8, config['seeds.jitter'])
        self.assertEqual(9, config['seeds.noise'])
        self.assertEqual('one_side', config['workspace.kind'])
        self.assertEqual(2, config['budgets.max_bases'])

    def test_set_override(self) -> None:
        code, stdout, _ = run_cli('analyze', '--dump-config', '--set', 'couch.height=0.9')
        self.assertEqual(0, code)
        self.assertEqual(0.9, parse_config(stdout)['couch.height'])

    def test_bad_config_fails(self) -> None:
        code, stdout, stderr = run_cli('simulate', '--set', 'couch.colour="red"')
        self.assertEqual(1, code)
        self.assertEqual('', stdout)
        self.assertEqual(1, len(stderr.splitlines()), stderr)
        self.assertIn('couch.colour', stderr)

    def test_evaluate(self) -> None:
        xs, ys = np.meshgrid(np.arange(20) * 0.01, np.arange(20) * 0.01)
        reference = PointCloud(np.column_stack((xs.ravel(), ys.ravel(), np.zeros(400))))
        scan = PointCloud(reference.points[:200] + (0., 0., 0.002))

        with tempfile.TemporaryDirectory() as directory:
            scan_path = Path(directory) / 'scan.ply'
            reference_path = Path(directory) / 'reference.ply'
            write_ply(scan_path, scan)
            write_ply(reference_path, reference)
            out = Path(directory) / 'evaluation'

            code, stdout, stderr = run_cli(
                'evaluate',
                str(scan_path),
                str(reference_path),
                '--out', str(out),
            )

            self.assertEqual(0, code, stderr)
            self.assertTrue((out / 'report.csv').exists())

        self.assertIn('reference: external_reference (400 points', stdout)
        self.assertIn('mean distance: 2.00 mm', stdout)

    def test_evaluate_missing_file(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            code, _, stderr = run_cli(
                'evaluate',
                str(Path(directory) / 'scan.ply'),
                str(Path(directory) / 'reference.ply'),
                '--out', str(Path(directory) / 'evaluation'),
            )
        self.assertEqual(1, code)
        self.assertIn('error:', stderr)

    def test_start_pose_argument(self) -> None:
        self.assertEqual(BasePose(1., 2., 0.5), cli._start_pose('1,2,0.5'))
        self.assertEqual('random', cli._start_pose('random'))


if __name__ == '__main__':
    unittest.main()
