from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from imuguard.constants import QUATERNION_NORM_TOL
from imuguard.exceptions import InvalidRotationError, ShapeError
from imuguard.types import QuaternionsArray, RotationMatrices, Vector3


@dataclass(frozen=True)
class Quaternion:
    """Hamilton quaternion stored scalar-first as (w, x, y, z).

    Orientation quaternions in imuguard rotate body-frame vectors into the world
    frame (q^w_b); use `conjugate` for the world-to-body direction.
    """

    w: float
    x: float
    y: float
    z: float

    @classmethod
    def identity(cls) -> Quaternion:
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, values: np.ndarray | list[float] | tuple[float, ...]) -> Quaternion:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (4,):
            raise ShapeError(f"Quaternion needs 4 components (w, x, y, z), got shape {arr.shape}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))

    @classmethod
    def from_rotation_vector(cls, rotvec: np.ndarray | list[float]) -> Quaternion:
        """Exponential map of a rotation vector (axis times angle, radians)."""
        return cls.from_array(exp_map(np.asarray(rotvec, dtype=np.float64)))

    @classmethod
    def from_axis_angle(cls, axis: np.ndarray | list[float], angle: float) -> Quaternion:
        axis = np.asarray(axis, dtype=np.float64)
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise InvalidRotationError("Rotation axis must be non-zero")
        return cls.from_rotation_vector(axis / norm * angle)

    @classmethod
    def from_euler_zyx(cls, yaw: float, pitch: float, roll: float) -> Quaternion:
        """Compose yaw (about z), then pitch (about y), then roll (about x)."""
        return cls.from_array(euler_zyx_to_quaternions(np.array([[yaw, pitch, roll]]))[0])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Quaternion:
        return cls.from_array(quaternions_from_matrices(np.asarray(matrix)[None])[0])

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def is_unit(self, tol: float = QUATERNION_NORM_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def require_unit(self) -> Quaternion:
        if not self.is_unit():
            raise InvalidRotationError(f"Quaternion {self.as_array().tolist()} is not unit-norm (|q| = {self.norm:.12g})")
        return self

    def normalized(self) -> Quaternion:
        n = self.norm
        if n == 0.0 or not np.isfinite(n):
            raise InvalidRotationError(f"Cannot normalize quaternion with norm {n}")
        return Quaternion.from_array(self.as_array() / n)

    def conjugate(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> Quaternion:
        return Quaternion.from_array(self.conjugate().as_array() / self.norm**2)

    def __mul__(self, other: Quaternion) -> Quaternion:
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion.from_array(quat_multiply(self.as_array(), other.as_array()))

    def rotate(self, v: Vector3 | list[float]) -> np.ndarray:
        """Rotate a 3-vector by this (unit) quaternion."""
        self.require_unit()
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (3,):
            raise ShapeError(f"Expected a 3-vector, got shape {v.shape}")
        return rotate_many(self.as_array(), v[None])[0]

    def to_matrix(self) -> np.ndarray:
        self.require_unit()
        return matrices_from_quaternions(self.as_array()[None])[0]

    def to_euler_zyx(self) -> tuple[float, float, float]:
        """Return (yaw, pitch, roll) in radians."""
        yaw, pitch, roll = quaternions_to_euler_zyx(self.as_array()[None])[0]
        return float(yaw), float(pitch), float(roll)

    @property
    def yaw(self) -> float:
        return self.to_euler_zyx()[0]

    def angle_to(self, other: Quaternion) -> float:
        """Angle of the rotation taking self onto other, radians in [0, pi]."""
        dot = abs(float(np.dot(self.as_array(), other.as_array())))
        return 2.0 * float(np.arccos(min(1.0, dot)))

    def slerp(self, other: Quaternion, u: float) -> Quaternion:
        """Spherical interpolation; u = 0 gives self and u = 1 gives other."""
        a = self.as_array()
        b = other.as_array()
        dot = float(np.dot(a, b))
        if dot < 0.0:
            b = -b
            dot = -dot
        if dot > 1.0 - 1e-12:
            out = a + u * (b - a)
            return Quaternion.from_array(out / np.linalg.norm(out))
        theta = np.arccos(dot)
        sin_theta = np.sin(theta)
        out = (np.sin((1.0 - u) * theta) * a + np.sin(u * theta) * b) / sin_theta
        return Quaternion.from_array(out / np.linalg.norm(out))


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of scalar-first quaternion arrays, broadcasting over leading axes."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=np.float64), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=np.float64), -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=np.float64, copy=True)
    out[..., 1:] *= -1.0
    return out


def normalize_quaternions(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    norms = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise InvalidRotationError("Cannot normalize zero or non-finite quaternions")
    return q / norms


def require_unit_quaternions(q: np.ndarray, tol: float = QUATERNION_NORM_TOL) -> None:
    q = np.asarray(q, dtype=np.float64)
    if q.shape[-1] != 4:
        raise ShapeError(f"Quaternion arrays need a trailing axis of 4, got shape {q.shape}")
    deviation = np.abs(np.linalg.norm(q, axis=-1) - 1.0)
    if deviation.size and float(deviation.max()) > tol:
        raise InvalidRotationError(f"Quaternion norm deviates from 1 by {float(deviation.max()):.3g} (tolerance {tol:g})")


def exp_map(rotvec: np.ndarray) -> np.ndarray:
    """Unit quaternion(s) of rotation vector(s); exact for every angle."""
    rotvec = np.asarray(rotvec, dtype=np.float64)
    angle = np.linalg.norm(rotvec, axis=-1, keepdims=True)
    # sin(angle / 2) / angle without a singularity at zero
    half_sinc = 0.5 * np.sinc(angle / (2.0 * np.pi))
    return np.concatenate([np.cos(angle / 2.0), half_sinc * rotvec], axis=-1)


def rotate_many(q: QuaternionsArray | np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate rows of `v` by `q` (one quaternion or one per row)."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w = q[..., :1]
    u = q[..., 1:]
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def matrices_from_quaternions(q: QuaternionsArray) -> RotationMatrices:
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )


def quaternions_from_matrices(matrices: RotationMatrices) -> QuaternionsArray:
    xyzw = Rotation.from_matrix(np.asarray(matrices, dtype=np.float64)).as_quat()
    wxyz = np.roll(xyzw, 1, axis=-1)
    # Canonical hemisphere keeps conversions deterministic
    return np.where(wxyz[..., :1] < 0.0, -wxyz, wxyz)


def euler_zyx_to_quaternions(ypr: np.ndarray) -> QuaternionsArray:
    """Convert rows of (yaw, pitch, roll) to scalar-first quaternions."""
    ypr = np.asarray(ypr, dtype=np.float64)
    half = ypr / 2.0
    cy, cp, cr = np.cos(half[..., 0]), np.cos(half[..., 1]), np.cos(half[..., 2])
    sy, sp, sr = np.sin(half[..., 0]), np.sin(half[..., 1]), np.sin(half[..., 2])
    return np.stack(
        [
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        ],
        axis=-1,
    )


def quaternions_to_euler_zyx(q: QuaternionsArray) -> np.ndarray:
    """Rows of (yaw, pitch, roll) in radians."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = np.moveaxis(q, -1, 0)
    yaw = np.arctan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    pitch = np.arcsin(np.clip(2.0 * (w * y - z * x), -1.0, 1.0))
    roll = np.arctan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    return np.stack([yaw, pitch, roll], axis=-1)


def rotate(q: Quaternion, v: Vector3 | list[float]) -> np.ndarray:
    """Rotate a 3-vector by a unit quaternion."""
    return q.rotate(v)
