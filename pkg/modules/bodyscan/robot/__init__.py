from .ik import solve_arm_ik
from .params import (
    DHRow,
    BasePose,
    ArmConfig,
    wrap_angle,
    RobotParams,
    default_robot_params,
)
from .hand_eye import (
    MotionPair,
    HandEyeErrors,
    solve_hand_eye,
    hand_eye_errors,
    simulate_hand_eye_pairs,
)
from .collision import arm_clear, base_fits, check_config, base_footprint
from .kinematics import link_origins, forward_kinematics

__all__ = (
    'DHRow',
    'BasePose',
    'ArmConfig',
    'arm_clear',
    'base_fits',
    'MotionPair',
    'wrap_angle',
    'RobotParams',
    'check_config',
    'link_origins',
    'solve_arm_ik',
    'HandEyeErrors',
    'base_footprint',
    'solve_hand_eye',
    'hand_eye_errors',
    'forward_kinematics',
    'default_robot_params',
    'simulate_hand_eye_pairs',
)
