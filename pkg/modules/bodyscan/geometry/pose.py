"""
Rigid transforms.

A `Pose` maps points from a child frame into its parent frame. Rotations are
held as unit quaternions (scalar-last, as `scipy` orders them) and exported as
matrices on demand.
"""

import math
from typing import Tuple, Optional

import numpy as np
import numpy.typing as npt
from scipy.spatial.transform import Rotation

FloatArray = npt.NDArray[np.float64]

# Tolerance within which a quaternion norm counts as unit.
UNIT_TOLERANCE = 1e-9


def _frozen(array: 'npt.ArrayLike', shape: Tuple[int, ...]) -> FloatArray:
    value = np.array(array, dtype=float)
    if value.shape != shape:
        raise ValueError("Expected shape {}, got {!r}".format(shape, value.shape))
    if not np.all(np.isfinite(value)):
        raise ValueError("Non-finite values in {!r}".format(value))
    value.flags.writeable = False
    return value


class Pose:
    """
    A rigid transform: rotation followed by translation (metres).

    Instances are immutable. ``a.compose(b)`` applies ``b`` then ``a``, so a
    chain of frame changes reads left to right from world to leaf.
    """

    __slots__ = ('_quaternion', '_translation')

    def __init__(
        self,
        quaternion: 'npt.ArrayLike' = (0., 0., 0., 1.),
        translation: 'npt.ArrayLike' = (0., 0., 0.),
    ) -> None:
        quat = np.array(quaternion, dtype=float)
        norm = np.linalg.norm(quat)
        if quat.shape != (4,) or not math.isfinite(norm) or norm < UNIT_TOLERANCE:
            raise ValueError("Invalid rotation quaternion {!r}".format(quaternion))
        # Canonical sign keeps equal rotations comparable.
        quat = quat / norm
        if quat[3] < 0:
            quat = -quat

        self._quaternion = _frozen(quat, (4,))
        self._translation = _frozen(translation, (3,))

    @classmethod
    def identity(cls) -> 'Pose':
        return cls()

    @classmethod
    def from_rotation(
        cls,
        rotation: Rotation,
        translation: 'npt.ArrayLike' = (0., 0., 0.),
    ) -> 'Pose':
        return cls(rotation.as_quat(), translation)

    @classmethod
    def from_matrix(cls, matrix: 'npt.ArrayLike') -> 'Pose':
        """Build from a 4×4 homogeneous matrix (rotation is re-orthonormalised)."""
        value = np.asarray(matrix, dtype=float)
        if value.shape != (4, 4):
            raise ValueError("Expected a 4x4 matrix, got shape {!r}".format(value.shape))
        return cls(Rotation.from_matrix(value[:3, :3]).as_quat(), value[:3, 3])

    @classmethod
    def from_rotvec(
        cls,
        rotvec: 'npt.ArrayLike',
        translation: 'npt.ArrayLike' = (0., 0., 0.),
    ) -> 'Pose':
        rotation = Rotation.from_rotvec(np.asarray(rotvec, dtype=float))
        return cls(rotation.as_quat(), translation)

    @classmethod
    def from_translation(cls, translation: 'npt.ArrayLike') -> 'Pose':
        return cls(translation=translation)

    @property
    def quaternion(self) -> FloatArray:
        return self._quaternion

    @property
    def translation(self) -> FloatArray:
        return self._translation

    @property
    def rotation(self) -> Rotation:
        return Rotation.from_quat(self._quaternion)

    def rotation_matrix(self) -> FloatArray:
        matrix: FloatArray = self.rotation.as_matrix()
        return matrix

    def matrix(self) -> FloatArray:
        result = np.eye(4)
        result[:3, :3] = self.rotation_matrix()
        result[:3, 3] = self._translation
        return result

    def compose(self, other: 'Pose') -> 'Pose':
        rotation = self.rotation
        return Pose(
            (rotation * other.rotation).as_quat(),
            rotation.apply(other.translation) + self._translation,
        )

    __matmul__ = compose

    def inverse(self) -> 'Pose':
        inverse_rotation = self.rotation.inv()
        return Pose(
            inverse_rotation.as_quat(),
            -inverse_rotation.apply(self._translation),
        )

    def apply(self, points: 'npt.ArrayLike') -> FloatArray:
        """Transform points (``(3,)`` or ``(N, 3)``) into the parent frame."""
        values = np.asarray(points, dtype=float)
        if values.size == 0:
            return values.reshape(-1, 3)
        result: FloatArray = self.rotation.apply(values) + self._translation
        return result

    def apply_vectors(self, vectors: 'npt.ArrayLike') -> FloatArray:
        """Rotate free vectors (e.g. normals); translation does not apply."""
        values = np.asarray(vectors, dtype=float)
        if values.size == 0:
            return values.reshape(-1, 3)
        result: FloatArray = self.rotation.apply(values)
        return result

    def rotation_angle(self) -> float:
        """Magnitude of the rotation, radians in [0, π]."""
        # atan2 stays accurate for tiny angles, where acos(w) loses half the digits.
        vector_part = float(np.linalg.norm(self._quaternion[:3]))
        return 2 * math.atan2(vector_part, abs(float(self._quaternion[3])))

    def angle_to(self, other: 'Pose') -> float:
        return self.inverse().compose(other).rotation_angle()

    def distance_to(self, other: 'Pose') -> float:
        return float(np.linalg.norm(self._translation - other.translation))

    def axis(self, index: int) -> FloatArray:
        """The child frame's x (0), y (1) or z (2) axis expressed in the parent."""
        column: FloatArray = self.rotation_matrix()[:, index]
        return column

    def is_close(
        self,
        other: 'Pose',
        angle_tolerance: float = 1e-9,
        distance_tolerance: float = 1e-9,
    ) -> bool:
        return (
            self.angle_to(other) <= angle_tolerance and
            self.distance_to(other) <= distance_tolerance
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pose):
            return NotImplemented

        return (
            bool(np.array_equal(self._quaternion, other._quaternion)) and
            bool(np.array_equal(self._translation, other._translation))
        )

    def __hash__(self) -> int:
        return hash((self._quaternion.tobytes(), self._translation.tobytes()))

    def __repr__(self) -> str:
        return 'Pose(quaternion={!r}, translation={!r})'.format(
            tuple(round(float(x), 9) for x in self._quaternion),
            tuple(round(float(x), 9) for x in self._translation),
        )


def compose(a: Pose, b: Pose) -> Pose:
    """Returns the transform applying ``b`` then ``a``."""
    return a.compose(b)


def inverse(pose: Pose) -> Pose:
    return pose.inverse()


def rotation_about_z(angle: float, translation: 'Optional[npt.ArrayLike]' = None) -> Pose:
    return Pose.from_rotvec(
        (0., 0., angle),
        (0., 0., 0.) if translation is None else translation,
    )


def look_rotation(
    forward: 'npt.ArrayLike',
    up_hint: 'npt.ArrayLike' = (0., 0., 1.),
) -> Rotation:
    """
    Rotation whose z axis points along `forward`, with its x axis horizontal.

    Camera frames here use z forward, x right and y down. When `forward` is
    (anti-)parallel to `up_hint` the world x axis is used to fix the roll.
    """
    z_axis = np.asarray(forward, dtype=float)
    z_axis = z_axis / np.linalg.norm(z_axis)
    x_axis = np.cross(z_axis, np.asarray(up_hint, dtype=float))
    if np.linalg.norm(x_axis) < 1e-6:
        x_axis = np.array((1., 0., 0.)) - z_axis[0] * z_axis
    x_axis = x_axis / np.linalg.norm(x_axis)
    y_axis = np.cross(z_axis, x_axis)
    return Rotation.from_matrix(np.column_stack((x_axis, y_axis, z_axis)))
