"""
Parameters of the mobile scanning robot and its planar/joint-space poses.
"""

import math
from typing import Tuple, Union, Sequence, NamedTuple

import numpy as np

from ..errors import JointLimit
from ..geometry import Pose, FloatArray, rotation_about_z

JOINTS = 6

# Published UR3 kinematics (standard Denavit–Hartenberg convention).
UR3_A = (0., -0.2437, -0.2133, 0., 0., 0.)
UR3_D = (0.1519, 0., 0., 0.1124, 0.0854, 0.0819)
UR3_ALPHA = (math.pi / 2, 0., 0., math.pi / 2, -math.pi / 2, 0.)
UR3_THETA_OFFSET = (0.,) * JOINTS


def wrap_angle(angle: float) -> float:
    """Normalise an angle to (-π, π]."""
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


class DHRow(NamedTuple):
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.

    def matrix(self, theta: float) -> FloatArray:
        """Rz(theta) · Tz(d) · Tx(a) · Rx(alpha)."""
        angle = theta + self.theta_offset
        ct, st = math.cos(angle), math.sin(angle)
        ca, sa = math.cos(self.alpha), math.sin(self.alpha)
        return np.array((
            (ct, -st * ca, st * sa, self.a * ct),
            (st, ct * ca, -ct * sa, self.a * st),
            (0., sa, ca, self.d),
            (0., 0., 0., 1.),
        ))


class _PlanarPose(NamedTuple):
    x: float
    y: float
    heading: float


class BasePose(_PlanarPose):
    """Planar pose of the mobile base on the floor; heading in (-π, π]."""

    __slots__ = ()

    def __new__(cls, x: float, y: float, heading: float = 0.) -> 'BasePose':
        return super().__new__(cls, float(x), float(y), wrap_angle(float(heading)))

    def pose(self) -> Pose:
        return rotation_about_z(self.heading, (self.x, self.y, 0.))

    def distance_to(self, other: 'BasePose') -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class ArmConfig(NamedTuple):
    joints: Tuple[float, ...]

    @classmethod
    def of(cls, joints: Union[Sequence[float], FloatArray]) -> 'ArmConfig':
        values = tuple(float(x) for x in joints)
        if len(values) != JOINTS:
            raise ValueError("Expected {} joint angles, got {}".format(JOINTS, len(values)))
        return cls(values)

    @classmethod
    def zero(cls) -> 'ArmConfig':
        return cls((0.,) * JOINTS)

    def as_array(self) -> FloatArray:
        return np.array(self.joints)


class RobotParams(NamedTuple):
    dh_rows: Tuple[DHRow, ...]
    # ^B T_R: the arm's mounting on top of the mobile base (relative to the
    # base's floor frame lifted by `base_height`).
    base_to_arm: Pose
    # ^R T_C: the camera relative to the frame of joint `camera_link`.
    flange_to_camera: Pose
    camera_link: int
    base_footprint: Tuple[float, float]  # width, depth (m); depth along the heading
    base_height: float
    joint_limits: Tuple[Tuple[float, float], ...]
    base_speed: float  # m/s
    link_clearance: float = 0.05

    def validated(self) -> 'RobotParams':
        if len(self.dh_rows) != JOINTS:
            raise ValueError("Expected {} DH rows, got {}".format(JOINTS, len(self.dh_rows)))
        if len(self.joint_limits) != JOINTS:
            raise ValueError("Expected {} joint limits, got {}".format(
                JOINTS,
                len(self.joint_limits),
            ))
        for index, (low, high) in enumerate(self.joint_limits):
            if not low < high:
                raise ValueError("Joint {} limits out of order: {!r}".format(
                    index + 1,
                    (low, high),
                ))
        if not 1 <= self.camera_link <= JOINTS:
            raise ValueError("Camera link must be within 1..{}, got {!r}".format(
                JOINTS,
                self.camera_link,
            ))
        if not self.base_speed > 0:
            raise ValueError("Base speed must be positive, got {!r}".format(self.base_speed))
        if not (self.base_footprint[0] > 0 and self.base_footprint[1] > 0):
            raise ValueError("Base footprint must be positive, got {!r}".format(
                self.base_footprint,
            ))
        return self

    @property
    def lower_limits(self) -> FloatArray:
        return np.array([low for low, _ in self.joint_limits])

    @property
    def upper_limits(self) -> FloatArray:
        return np.array([high for _, high in self.joint_limits])

    def footprint_radius(self) -> float:
        """Half the footprint diagonal: the base's reach on the floor."""
        return math.hypot(*self.base_footprint) / 2

    def reach(self) -> float:
        """Upper bound on the camera's distance from the shoulder joint."""
        tail = sum(abs(row.a) + abs(row.d) for row in self.dh_rows[1:])
        return tail + float(np.linalg.norm(self.flange_to_camera.translation))

    def check_limits(self, arm: ArmConfig) -> None:
        joints = arm.as_array()
        outside = (joints < self.lower_limits) | (joints > self.upper_limits)
        if np.any(outside):
            raise JointLimit("Joints {} outside their limits: {!r}".format(
                (np.flatnonzero(outside) + 1).tolist(),
                arm.joints,
            ))


def default_robot_params(
    dh_a: Sequence[float] = UR3_A,
    dh_d: Sequence[float] = UR3_D,
    dh_alpha: Sequence[float] = UR3_ALPHA,
    dh_theta_offset: Sequence[float] = UR3_THETA_OFFSET,
    base_height: float = 0.8,
    arm_offset: float = 0.15,
    camera_link: int = 5,
    camera_standoff: float = 0.05,
    footprint: Tuple[float, float] = (0.4, 0.5),
    base_speed: float = 0.08,
    joint_limit: float = 2 * math.pi,
) -> RobotParams:
    """
    A UR3 on a mobile base, camera held `camera_standoff` along the axis of
    joint `camera_link`'s frame.
    """
    return RobotParams(
        dh_rows=tuple(
            DHRow(a, alpha, d, offset)
            for a, alpha, d, offset in zip(dh_a, dh_alpha, dh_d, dh_theta_offset)
        ),
        base_to_arm=Pose.from_translation((arm_offset, 0., 0.)),
        flange_to_camera=Pose.from_translation((0., 0., camera_standoff)),
        camera_link=camera_link,
        base_footprint=(float(footprint[0]), float(footprint[1])),
        base_height=base_height,
        joint_limits=((-joint_limit, joint_limit),) * JOINTS,
        base_speed=base_speed,
    ).validated()
