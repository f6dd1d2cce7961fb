"""
Camera-pose inverse kinematics by damped least squares.
"""

import math
from typing import List, Tuple, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .params import BasePose, ArmConfig, wrap_angle, RobotParams
from ..geometry import Pose, FloatArray
from .kinematics import arm_mount, joint_frames, camera_matrix, camera_jacobian

DAMPING = 0.05
MAX_ITERATIONS = 200

# A solution must reproduce the target this closely.
POSITION_TOLERANCE = 0.005
ANGLE_TOLERANCE = math.radians(2)

# Iteration stops once the combined error norm falls below this.
CONVERGED = 1e-6

# Largest change to any joint in a single step (rad).
MAX_STEP = 0.5

# Attempts stop early when the best error has not improved by this factor
# within `STAGNATION_WINDOW` iterations.
STAGNATION_FACTOR = 0.999
STAGNATION_WINDOW = 25

# Restart postures; joint 1 is replaced by an angle aiming the arm at the target.
CANONICAL_POSTURES = (
    (0., -math.pi / 2, math.pi / 2, -math.pi / 2, -math.pi / 2, 0.),
    (0., -math.pi / 4, -math.pi / 2, -math.pi / 4, math.pi / 2, 0.),
    (0., -3 * math.pi / 4, math.pi / 2, 0., -math.pi / 2, 0.),
)


class _Residual:
    """Camera-to-target error for one arm configuration."""

    def __init__(
        self,
        params: RobotParams,
        frames: List[FloatArray],
        target: FloatArray,
        free_roll: bool,
    ) -> None:
        camera = camera_matrix(params, frames)
        self.linear = target[:3, 3] - camera[:3, 3]

        if free_roll:
            # Only the viewing axis (camera z) has to match.
            axis, goal = camera[:3, 2], target[:3, 2]
            cross = np.cross(axis, goal)
            sine = float(np.linalg.norm(cross))
            self.angle = math.atan2(sine, float(axis @ goal))
            if sine > 1e-12:
                self.angular = cross / sine * self.angle
            elif self.angle > math.pi / 2:
                # Facing exactly away: turn about any axis normal to the view.
                perpendicular = np.cross(axis, (1., 0., 0.))
                if np.linalg.norm(perpendicular) < 1e-6:
                    perpendicular = np.cross(axis, (0., 1., 0.))
                self.angular = perpendicular / np.linalg.norm(perpendicular) * self.angle
            else:
                self.angular = np.zeros(3)
        else:
            rotation = Rotation.from_matrix(target[:3, :3] @ camera[:3, :3].T)
            self.angular = rotation.as_rotvec()
            self.angle = float(np.linalg.norm(self.angular))

        self.vector = np.concatenate((self.linear, self.angular))
        self.norm = float(np.linalg.norm(self.vector))
        self.distance = float(np.linalg.norm(self.linear))
        self.viewing_axis = camera[:3, 2]

    def acceptable(self) -> bool:
        return self.distance <= POSITION_TOLERANCE and self.angle <= ANGLE_TOLERANCE


def _descend(
    params: RobotParams,
    mount: FloatArray,
    target: FloatArray,
    start: FloatArray,
    free_roll: bool,
    damping: float,
    max_iterations: int,
) -> Tuple[FloatArray, _Residual]:
    lower, upper = params.lower_limits, params.upper_limits
    joints = np.clip(start, lower, upper)
    frames = joint_frames(params, mount, joints)
    residual = _Residual(params, frames, target, free_roll)
    best_joints, best = joints, residual
    last_improvement = 0

    for iteration in range(max_iterations):
        if best.norm < CONVERGED:
            break

        jacobian = camera_jacobian(params, frames)
        if free_roll:
            axis = residual.viewing_axis
            jacobian[3:] = (np.eye(3) - np.outer(axis, axis)) @ jacobian[3:]

        system = jacobian @ jacobian.T + damping ** 2 * np.eye(6)
        step = jacobian.T @ np.linalg.solve(system, residual.vector)
        largest = float(np.abs(step).max())
        if largest > MAX_STEP:
            step *= MAX_STEP / largest

        joints = np.clip(joints + step, lower, upper)
        frames = joint_frames(params, mount, joints)
        residual = _Residual(params, frames, target, free_roll)

        if residual.norm < best.norm * STAGNATION_FACTOR:
            last_improvement = iteration
        if residual.norm < best.norm:
            best_joints, best = joints, residual
        if iteration - last_improvement > STAGNATION_WINDOW:
            break

    return best_joints, best


def _restart_seeds(
    params: RobotParams,
    mount: FloatArray,
    target: FloatArray,
) -> List[FloatArray]:
    local = np.linalg.solve(mount, np.append(target[:3, 3], 1.))
    bearing = math.atan2(local[1], local[0])

    seeds = []
    for posture in CANONICAL_POSTURES:
        # The UR shoulder link extends along -x at zero, hence the half turn.
        for aim in (wrap_angle(bearing + math.pi), bearing):
            seed = np.array(posture)
            seed[0] = aim
            seeds.append(np.clip(seed, params.lower_limits, params.upper_limits))
    return seeds


def solve_arm_ik(
    params: RobotParams,
    base: BasePose,
    target_camera: Pose,
    seed_config: ArmConfig,
    free_roll: bool = False,
    restarts: int = 4,
    damping: float = DAMPING,
    max_iterations: int = MAX_ITERATIONS,
) -> Optional[ArmConfig]:
    """
    Arm configuration placing the camera at `target_camera`, or ``None`` when
    no attempt gets within 5 mm and 2° of it.

    The first attempt starts from `seed_config`; up to `restarts` further
    attempts start from canonical postures turned towards the target. With
    `free_roll` only the camera's viewing axis is constrained, not its roll
    about that axis.
    """
    target = target_camera.matrix()

    mount = arm_mount(params, base)
    starts = [seed_config.as_array()] + _restart_seeds(params, mount, target)[:restarts]
    for start in starts:
        joints, residual = _descend(
            params,
            mount,
            target,
            start,
            free_roll,
            damping,
            max_iterations,
        )
        if residual.acceptable():
            return ArmConfig.of(joints)
    return None
