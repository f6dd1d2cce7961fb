#!/usr/bin/env python

import math
import unittest
import statistics

import numpy as np

from .ik import solve_arm_ik, POSITION_TOLERANCE
from .params import BasePose, ArmConfig, RobotParams, default_robot_params
from ..bodies import CouchSpec, make_half_cylinder
from ..errors import JointLimit, DegenerateMotions
from .hand_eye import solve_hand_eye, hand_eye_errors, simulate_hand_eye_pairs
from ..geometry import Pose, look_rotation
from .collision import arm_clear, base_fits, check_config
from .kinematics import link_origins, forward_kinematics
from ..cspace.workspace import make_workspace

FOLDED_UP = ArmConfig.of((0., -math.pi / 2, 0., -math.pi / 2, 0., 0.))


def random_config(rng: np.random.Generator) -> ArmConfig:
    return ArmConfig.of(rng.uniform(-math.pi, math.pi, size=6))


class ForwardKinematicsTests(unittest.TestCase):
    params: RobotParams

    @classmethod
    def setUpClass(cls) -> None:
        cls.params = default_robot_params()

    def test_zero_configuration(self) -> None:
        # UR3 at zero: shoulder and elbow links along -x, wrist offsets along
        # -y and then down; camera 5 cm beyond joint 5 along -y.
        camera = forward_kinematics(self.params, BasePose(0, 0, 0), ArmConfig.zero())

        np.testing.assert_allclose(
            camera.translation,
            (0.15 - 0.2437 - 0.2133, -0.1124 - 0.05, 0.8 + 0.1519 - 0.0854),
            atol=1e-12,
        )
        np.testing.assert_allclose(
            camera.rotation_matrix(),
            ((1, 0, 0), (0, 0, -1), (0, 1, 0)),
            atol=1e-12,
        )

    def test_base_translation_moves_camera(self) -> None:
        rng = np.random.default_rng(3)
        for _ in range(5):
            arm = random_config(rng)
            with self.subTest(arm=arm):
                here = forward_kinematics(self.params, BasePose(0, 0, 0.3), arm)
                there = forward_kinematics(self.params, BasePose(1, 0, 0.3), arm)
                np.testing.assert_allclose(
                    there.translation - here.translation,
                    (1, 0, 0),
                    atol=1e-12,
                )
                self.assertLess(here.angle_to(there), 1e-12)

    def test_base_heading_rotates_camera(self) -> None:
        rng = np.random.default_rng(4)
        for _ in range(5):
            arm = random_config(rng)
            with self.subTest(arm=arm):
                here = forward_kinematics(self.params, BasePose(0, 0, 0), arm)
                turned = forward_kinematics(self.params, BasePose(0, 0, math.pi), arm)
                x, y, z = here.translation
                np.testing.assert_allclose(turned.translation, (-x, -y, z), atol=1e-12)

    def test_continuity(self) -> None:
        rng = np.random.default_rng(5)
        base = BasePose(0.3, -1, 1)
        for joint in range(6):
            arm = random_config(rng)
            nudged = list(arm.joints)
            nudged[joint] += 1e-6
            with self.subTest(joint=joint):
                moved = forward_kinematics(self.params, base, arm).distance_to(
                    forward_kinematics(self.params, base, ArmConfig.of(nudged)),
                )
                self.assertLess(moved, 1e-4)

    def test_joint_limit(self) -> None:
        params = default_robot_params(joint_limit=math.pi)
        with self.assertRaises(JointLimit):
            forward_kinematics(params, BasePose(0, 0, 0), ArmConfig.of((0, 0, 4, 0, 0, 0)))

    def test_link_origins_end_at_camera(self) -> None:
        arm = random_config(np.random.default_rng(6))
        base = BasePose(0.5, 1, -2)
        origins = link_origins(self.params, base, arm)
        self.assertEqual((8, 3), origins.shape)
        np.testing.assert_allclose(
            origins[-1],
            forward_kinematics(self.params, base, arm).translation,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            origins[0],
            (0.5 + 0.15 * math.cos(-2), 1 + 0.15 * math.sin(-2), 0.8),
        )

    def test_base_pose_heading_is_wrapped(self) -> None:
        self.assertAlmostEqual(-math.pi / 2, BasePose(0, 0, 3 * math.pi / 2).heading)
        self.assertAlmostEqual(math.pi, BasePose(0, 0, -math.pi).heading)

    def test_rejects_wrong_joint_count(self) -> None:
        with self.assertRaises(ValueError):
            ArmConfig.of((0., 0.))

    def test_rejects_bad_params(self) -> None:
        cases = {
            'speed': self.params._replace(base_speed=0),
            'limits': self.params._replace(joint_limits=((1., -1.),) * 6),
            'camera link': self.params._replace(camera_link=7),
        }
        for name, params in cases.items():
            with self.subTest(name), self.assertRaises(ValueError):
                params.validated()


class InverseKinematicsTests(unittest.TestCase):
    params: RobotParams

    @classmethod
    def setUpClass(cls) -> None:
        cls.params = default_robot_params()

    def assertSolves(self, base: BasePose, target: Pose, solution: ArmConfig) -> None:
        reached = forward_kinematics(self.params, base, solution)
        self.assertLessEqual(
            reached.distance_to(target),
            POSITION_TOLERANCE,
            "Solution {} misses the target position".format(solution),
        )
        self.assertLessEqual(
            math.degrees(reached.angle_to(target)),
            2,
            "Solution {} misses the target orientation".format(solution),
        )

    def test_round_trip_from_own_seed(self) -> None:
        rng = np.random.default_rng(10)
        base = BasePose(0.2, -0.4, 0.7)
        for _ in range(5):
            arm = random_config(rng)
            with self.subTest(arm=arm):
                target = forward_kinematics(self.params, base, arm)
                solution = solve_arm_ik(self.params, base, target, arm)
                assert solution is not None
                np.testing.assert_allclose(solution.joints, arm.joints, atol=1e-6)

    def test_target_out_of_reach(self) -> None:
        target = Pose.from_translation((10., 0., 1.))
        solution = solve_arm_ik(self.params, BasePose(0, 0, 0), target, ArmConfig.zero())
        self.assertIsNone(solution)

    def test_random_reachable_targets(self) -> None:
        rng = np.random.default_rng(11)
        base = BasePose(0, 0, 0)
        successes = 0
        for _ in range(100):
            target = forward_kinematics(self.params, base, random_config(rng))
            solution = solve_arm_ik(self.params, base, target, random_config(rng))
            if solution is not None:
                successes += 1
                self.assertSolves(base, target, solution)
        self.assertGreaterEqual(successes, 70, "Too few reachable targets solved")

    def test_free_roll_constrains_viewing_axis_only(self) -> None:
        rng = np.random.default_rng(12)
        base = BasePose(0, 0, 0)
        target = forward_kinematics(self.params, base, random_config(rng))
        rolled = target.compose(Pose.from_rotvec((0., 0., 1.2)))

        solution = solve_arm_ik(self.params, base, rolled, random_config(rng), free_roll=True)

        assert solution is not None
        reached = forward_kinematics(self.params, base, solution)
        self.assertLessEqual(reached.distance_to(rolled), POSITION_TOLERANCE)
        self.assertGreater(float(reached.axis(2) @ rolled.axis(2)), math.cos(math.radians(2)))

    def test_solution_respects_limits(self) -> None:
        params = default_robot_params(joint_limit=math.pi)
        rng = np.random.default_rng(13)
        base = BasePose(0, 0, 0)
        for _ in range(10):
            target = forward_kinematics(params, base, random_config(rng))
            solution = solve_arm_ik(params, base, target, ArmConfig.zero())
            if solution is not None:
                params.check_limits(solution)


class CheckConfigTests(unittest.TestCase):
    def setUp(self) -> None:
        self.params = default_robot_params()
        self.couch = CouchSpec()
        self.body = make_half_cylinder(1.75, 0.2, self.couch, 0.1)
        self.workspace = make_workspace('full', self.couch)

    def check(self, base: BasePose, arm: ArmConfig) -> bool:
        return check_config(self.params, base, arm, self.couch, self.body, self.workspace)

    def test_base_inside_couch_footprint(self) -> None:
        self.assertFalse(self.check(BasePose(0, 0, 0), FOLDED_UP))

    def test_folded_arm_beside_couch(self) -> None:
        base = BasePose(0, self.couch.width / 2 + 0.8, -math.pi / 2)
        camera = forward_kinematics(self.params, base, FOLDED_UP)
        self.assertGreater(camera.translation[2], self.couch.height + 0.5)

        self.assertTrue(self.check(base, FOLDED_UP))

    def test_camera_below_couch_top(self) -> None:
        base = BasePose(0, 3., -math.pi / 2)
        drooping = ArmConfig.of((0., math.pi / 2, 0., 0., 0., 0.))
        camera = forward_kinematics(self.params, base, drooping)
        self.assertLess(camera.translation[2], self.couch.height)

        self.assertFalse(self.check(base, drooping))

    def test_arm_reaching_into_body(self) -> None:
        base = BasePose(0, self.couch.width / 2 + 0.3, -math.pi / 2)
        for depth in (0.05, 0.1, 0.15):
            inside = Pose.from_rotation(
                look_rotation((0., 0., -1.)),
                (0., 0., self.couch.height + 0.2 - depth),
            )
            solution = solve_arm_ik(self.params, base, inside, FOLDED_UP, free_roll=True)
            with self.subTest(depth=depth):
                if solution is None:
                    self.skipTest("Inside of the body not reachable from this base")
                self.assertFalse(arm_clear(self.params, base, solution, self.couch, self.body))
                self.assertFalse(self.check(base, solution))

    def test_base_outside_workspace(self) -> None:
        narrow = make_workspace('narrow', self.couch)
        base = BasePose(0, self.couch.width / 2 + 2, -math.pi / 2)
        self.assertTrue(base_fits(self.params, base, self.couch, self.workspace))
        self.assertFalse(base_fits(self.params, base, self.couch, narrow))

    def test_blocked_side(self) -> None:
        one_side = make_workspace('one_side', self.couch, blocked_side='right')
        right = BasePose(0, -(self.couch.width / 2 + 0.6), math.pi / 2)
        left = BasePose(0, self.couch.width / 2 + 0.6, -math.pi / 2)
        self.assertFalse(base_fits(self.params, right, self.couch, one_side))
        self.assertTrue(base_fits(self.params, left, self.couch, one_side))


class HandEyeTests(unittest.TestCase):
    mounting = Pose.from_rotvec((0.3, -0.2, 1.1), (0.02, -0.05, 0.07))

    def test_noiseless_recovery(self) -> None:
        pairs = simulate_hand_eye_pairs(self.mounting, 10, seed=1)
        estimate = solve_hand_eye(pairs)
        self.assertLess(estimate.angle_to(self.mounting), 1e-9)
        self.assertLess(estimate.distance_to(self.mounting), 1e-9)

    def test_noisy_recovery(self) -> None:
        rotations, translations = [], []
        for seed in range(50):
            pairs = simulate_hand_eye_pairs(
                self.mounting,
                10,
                seed=seed,
                rotation_noise=math.radians(0.1),
                translation_noise=0.001,
            )
            errors = hand_eye_errors(solve_hand_eye(pairs), self.mounting)
            rotations.append(errors.rotation_deg)
            translations.append(errors.translation)

        self.assertLess(statistics.median(rotations), 0.5)
        self.assertLess(statistics.median(translations), 0.01)

    def test_invariant_to_inverting_and_reordering_pairs(self) -> None:
        pairs = simulate_hand_eye_pairs(self.mounting, 6, seed=2)
        variants = {
            'inverted': [(a.inverse(), b.inverse()) for a, b in pairs],
            'reversed': pairs[::-1],
        }
        reference = solve_hand_eye(pairs)
        for name, variant in variants.items():
            with self.subTest(name):
                estimate = solve_hand_eye(variant)
                self.assertLess(estimate.angle_to(reference), 1e-9)
                self.assertLess(estimate.distance_to(reference), 1e-9)

    def test_follows_change_of_frame(self) -> None:
        pairs = simulate_hand_eye_pairs(self.mounting, 6, seed=4)
        change = Pose.from_rotvec((0.4, 0.1, -0.7), (0.2, -0.1, 0.3))
        back = change.inverse()
        variants = {
            'flange frame': (
                [(change @ a @ back, b) for a, b in pairs],
                change @ self.mounting,
            ),
            'camera frame': (
                [(a, change @ b @ back) for a, b in pairs],
                self.mounting @ back,
            ),
        }
        for name, (variant, expected) in variants.items():
            with self.subTest(name):
                estimate = solve_hand_eye(variant)
                self.assertLess(estimate.angle_to(expected), 1e-8)
                self.assertLess(estimate.distance_to(expected), 1e-8)

    def test_too_few_pairs(self) -> None:
        pairs = simulate_hand_eye_pairs(self.mounting, 2, seed=3)
        with self.assertRaises(DegenerateMotions):
            solve_hand_eye(pairs)

    def test_parallel_rotation_axes(self) -> None:
        pairs = []
        for angle in (0.5, 0.9, 1.3, -0.7):
            motion = Pose.from_rotvec((0., 0., angle), (angle, 0.1, 0.))
            pairs.append((motion, self.mounting.inverse() @ motion @ self.mounting))
        with self.assertRaises(DegenerateMotions):
            solve_hand_eye(pairs)

    def test_error_breakdown(self) -> None:
        shifted = Pose.from_translation((0.003, -0.004, 0.)) @ self.mounting
        errors = hand_eye_errors(shifted, self.mounting)
        self.assertAlmostEqual(0.005, errors.translation)
        np.testing.assert_allclose(errors.translation_xyz, (0.003, -0.004, 0.), atol=1e-12)
        self.assertAlmostEqual(0., errors.rotation_deg)


if __name__ == '__main__':
    unittest.main()
