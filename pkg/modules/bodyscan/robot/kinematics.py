"""
Forward kinematics of the base, arm and camera chain.

Frames: world ← base (planar pose on the floor) ← lifted by the base height ←
arm base (`base_to_arm`) ← Denavit–Hartenberg joints ← camera
(`flange_to_camera`, after joint `camera_link`).
"""

from typing import List

import numpy as np

from .params import BasePose, ArmConfig, RobotParams
from ..geometry import Pose, FloatArray


def arm_mount(params: RobotParams, base: BasePose) -> FloatArray:
    """World transform of the arm's base frame as a 4×4 matrix."""
    lift = np.eye(4)
    lift[2, 3] = params.base_height
    result: FloatArray = base.pose().matrix() @ lift @ params.base_to_arm.matrix()
    return result


def joint_frames(
    params: RobotParams,
    mount: FloatArray,
    joints: FloatArray,
) -> List[FloatArray]:
    """World transforms of the arm base frame and each joint frame in turn."""
    frames = [mount]
    for row, theta in zip(params.dh_rows, joints):
        frames.append(frames[-1] @ row.matrix(float(theta)))
    return frames


def camera_matrix(params: RobotParams, frames: List[FloatArray]) -> FloatArray:
    result: FloatArray = frames[params.camera_link] @ params.flange_to_camera.matrix()
    return result


def forward_kinematics(params: RobotParams, base: BasePose, arm: ArmConfig) -> Pose:
    """The camera's pose in the world."""
    params.check_limits(arm)
    frames = joint_frames(params, arm_mount(params, base), arm.as_array())
    return Pose.from_matrix(camera_matrix(params, frames))


def link_origins(params: RobotParams, base: BasePose, arm: ArmConfig) -> FloatArray:
    """
    World positions of the arm base, every joint frame origin and finally the
    camera: the polyline the collision screen treats as the arm's links.
    """
    params.check_limits(arm)
    frames = joint_frames(params, arm_mount(params, base), arm.as_array())
    camera = camera_matrix(params, frames)
    return np.array([frame[:3, 3] for frame in frames] + [camera[:3, 3]])


def camera_jacobian(params: RobotParams, frames: List[FloatArray]) -> FloatArray:
    """
    Geometric Jacobian (6 × joints) of the camera: linear velocity rows over
    angular velocity rows, in world axes. Joints after `camera_link` do not
    move the camera.
    """
    position = camera_matrix(params, frames)[:3, 3]
    jacobian = np.zeros((6, len(params.dh_rows)))
    for index in range(params.camera_link):
        axis = frames[index][:3, 2]
        jacobian[:3, index] = np.cross(axis, position - frames[index][:3, 3])
        jacobian[3:, index] = axis
    return jacobian
