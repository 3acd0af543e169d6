from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from imuguard.constants import GRAVITY_NORM_RANGE, STANDARD_GRAVITY, TIME_TOL
from imuguard.core.quaternion import (
    Quaternion,
    matrices_from_quaternions,
    normalize_quaternions,
    require_unit_quaternions,
)
from imuguard.exceptions import ConfigurationError, DataError, OrderingError, ResamplingError, ShapeError
from imuguard.types import AccelerationArray, AngularRateArray, PositionArray, QuaternionsArray, Timestamps


def _vector3(name: str, value: np.ndarray | Sequence[float]) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ShapeError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} has non-finite components: {arr.tolist()}")
    return arr


def _check_increasing(t: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(t)):
        raise DataError(f"{what} timestamps must be finite")
    if t.size > 1:
        dt = np.diff(t)
        if np.any(dt <= 0.0):
            bad = int(np.argmax(dt <= 0.0))
            raise OrderingError(f"{what} timestamps must be strictly increasing: t[{bad}] = {t[bad]!r} >= t[{bad + 1}] = {t[bad + 1]!r}")


@dataclass(frozen=True, eq=False)
class ImuSample:
    """One accelerometer reading (m/s^2, body frame) with an optional gyro reading (rad/s)."""

    t: float
    acc: np.ndarray
    gyro: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.t):
            raise DataError(f"Sample timestamp must be finite, got {self.t}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "acc", _vector3("acc", self.acc))
        if self.gyro is not None:
            object.__setattr__(self, "gyro", _vector3("gyro", self.gyro))


@dataclass(frozen=True, eq=False)
class ImuBias:
    """Additive accelerometer (m/s^2) and gyroscope (rad/s) offsets."""

    acc: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gyro: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "acc", _vector3("acc bias", self.acc))
        object.__setattr__(self, "gyro", _vector3("gyro bias", self.gyro))

    @classmethod
    def zero(cls) -> ImuBias:
        return cls()


@dataclass(frozen=True)
class NoiseSpec:
    """White measurement noise levels and the seed of its generator."""

    acc_sigma: float = 0.0
    gyro_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.acc_sigma < 0 or self.gyro_sigma < 0:
            raise ConfigurationError(f"Noise sigmas must be >= 0, got acc={self.acc_sigma}, gyro={self.gyro_sigma}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True, eq=False)
class WorldModel:
    """World-frame constants. `gravity` is the vector added inside the measurement rotation."""

    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, STANDARD_GRAVITY]))
    allow_any_gravity: bool = False

    def __post_init__(self) -> None:
        g = _vector3("gravity", self.gravity)
        object.__setattr__(self, "gravity", g)
        norm = float(np.linalg.norm(g))
        lo, hi = GRAVITY_NORM_RANGE
        if not self.allow_any_gravity and not lo <= norm <= hi:
            raise ConfigurationError(f"|gravity| = {norm:.4f} outside [{lo}, {hi}]; set allow_any_gravity to override")

    @property
    def gravity_norm(self) -> float:
        return float(np.linalg.norm(self.gravity))


@dataclass(frozen=True, eq=False)
class NavState:
    """Position, velocity (world frame) and body-to-world orientation at time t."""

    t: float
    p: np.ndarray
    v: np.ndarray
    q: Quaternion

    def __post_init__(self) -> None:
        if not np.isfinite(self.t):
            raise DataError(f"State timestamp must be finite, got {self.t}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "p", _vector3("position", self.p))
        object.__setattr__(self, "v", _vector3("velocity", self.v))
        self.q.require_unit()

    @classmethod
    def at_rest(cls, t: float = 0.0) -> NavState:
        return cls(t=t, p=np.zeros(3), v=np.zeros(3), q=Quaternion.identity())


@dataclass(eq=False)
class ImuStream:
    """Columnar IMU recording: timestamps (n,), accelerometer (n, 3), optional gyroscope (n, 3).

    Rows are samples in strictly increasing time. Indexing returns `ImuSample` views,
    slicing returns a new stream.
    """

    t: Timestamps
    acc: AccelerationArray
    gyro: AngularRateArray | None = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        self.acc = np.asarray(self.acc, dtype=np.float64).reshape(-1, 3)
        if self.acc.shape[0] != self.t.shape[0]:
            raise ShapeError(f"acc has {self.acc.shape[0]} rows but there are {self.t.shape[0]} timestamps")
        if self.gyro is not None:
            self.gyro = np.asarray(self.gyro, dtype=np.float64).reshape(-1, 3)
            if self.gyro.shape[0] != self.t.shape[0]:
                raise ShapeError(f"gyro has {self.gyro.shape[0]} rows but there are {self.t.shape[0]} timestamps")
            if not np.all(np.isfinite(self.gyro)):
                raise DataError("gyro contains non-finite values")
        if not np.all(np.isfinite(self.acc)):
            raise DataError("acc contains non-finite values")
        _check_increasing(self.t, "IMU stream")

    @classmethod
    def from_samples(cls, samples: Sequence[ImuSample]) -> ImuStream:
        if len(samples) == 0:
            return cls(t=np.zeros(0), acc=np.zeros((0, 3)))
        with_gyro = [s.gyro is not None for s in samples]
        if any(with_gyro) and not all(with_gyro):
            raise ShapeError("Either every sample carries a gyro reading or none does")
        gyro = np.stack([s.gyro for s in samples]) if all(with_gyro) else None
        return cls(
            t=np.array([s.t for s in samples]),
            acc=np.stack([s.acc for s in samples]),
            gyro=gyro,
        )

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def __getitem__(self, index: int | slice) -> ImuSample | ImuStream:
        if isinstance(index, slice):
            return ImuStream(
                t=self.t[index].copy(),
                acc=self.acc[index].copy(),
                gyro=None if self.gyro is None else self.gyro[index].copy(),
            )
        return ImuSample(
            t=self.t[index],
            acc=self.acc[index],
            gyro=None if self.gyro is None else self.gyro[index],
        )

    def __iter__(self) -> Iterator[ImuSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def has_gyro(self) -> bool:
        return self.gyro is not None

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self) > 1 else 0.0

    def nominal_period(self) -> float:
        """Median sample spacing in seconds."""
        if len(self) < 2:
            raise DataError("A nominal period needs at least two samples")
        return float(np.median(np.diff(self.t)))

    def channels(self, dims: int, gyro_weight: float = 1.0) -> np.ndarray:
        """Stack channels as (ax, ay, az) or (ax, ay, az, w*gx, w*gy, w*gz)."""
        if dims == 3:
            return self.acc.copy()
        if dims == 6:
            if self.gyro is None:
                raise ShapeError("Six-channel series need gyroscope data in the stream")
            return np.hstack([self.acc, gyro_weight * self.gyro])
        raise ConfigurationError(f"Series dimension must be 3 or 6, got {dims}")

    def copy(self) -> ImuStream:
        return ImuStream(
            t=self.t.copy(),
            acc=self.acc.copy(),
            gyro=None if self.gyro is None else self.gyro.copy(),
        )

    def replace(self, acc: np.ndarray | None = None, gyro: np.ndarray | None = None) -> ImuStream:
        """Copy of the stream with new channel arrays and the same timestamps."""
        return ImuStream(
            t=self.t.copy(),
            acc=self.acc.copy() if acc is None else acc,
            gyro=(None if self.gyro is None else self.gyro.copy()) if gyro is None else gyro,
        )


@dataclass(eq=False)
class Trajectory:
    """Time-ordered poses: timestamps (n,), positions (n, 3), body-to-world quaternions (n, 4).

    Velocities are optional since trajectory files only carry poses.
    """

    t: Timestamps
    p: PositionArray
    q: QuaternionsArray
    v: PositionArray | None = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        self.p = np.asarray(self.p, dtype=np.float64).reshape(-1, 3)
        self.q = np.asarray(self.q, dtype=np.float64).reshape(-1, 4)
        n = self.t.shape[0]
        if self.p.shape[0] != n or self.q.shape[0] != n:
            raise ShapeError(f"Trajectory arrays disagree: {n} timestamps, {self.p.shape[0]} positions, {self.q.shape[0]} orientations")
        if self.v is not None:
            self.v = np.asarray(self.v, dtype=np.float64).reshape(-1, 3)
            if self.v.shape[0] != n:
                raise ShapeError(f"Trajectory has {n} poses but {self.v.shape[0]} velocities")
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.q))):
            raise DataError("Trajectory contains non-finite poses")
        require_unit_quaternions(self.q)
        _check_increasing(self.t, "Trajectory")

    @classmethod
    def from_states(cls, states: Sequence[NavState]) -> Trajectory:
        if len(states) == 0:
            return cls(t=np.zeros(0), p=np.zeros((0, 3)), q=np.zeros((0, 4)), v=np.zeros((0, 3)))
        return cls(
            t=np.array([s.t for s in states]),
            p=np.stack([s.p for s in states]),
            q=np.stack([s.q.as_array() for s in states]),
            v=np.stack([s.v for s in states]),
        )

    @classmethod
    def from_unnormalized(cls, t: np.ndarray, p: np.ndarray, q: np.ndarray) -> Trajectory:
        """Build from quaternions with limited precision (e.g. text files), renormalizing them."""
        return cls(t=t, p=p, q=normalize_quaternions(q))

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def state(self, index: int) -> NavState:
        return NavState(
            t=self.t[index],
            p=self.p[index],
            v=np.zeros(3) if self.v is None else self.v[index],
            q=Quaternion.from_array(self.q[index]),
        )

    def states(self) -> list[NavState]:
        return [self.state(i) for i in range(len(self))]

    def rotation_matrices(self) -> np.ndarray:
        return matrices_from_quaternions(self.q)

    def subset(self, indices: np.ndarray) -> Trajectory:
        return Trajectory(
            t=self.t[indices],
            p=self.p[indices],
            q=self.q[indices],
            v=None if self.v is None else self.v[indices],
        )

    def path_length(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.p, axis=0), axis=1).sum())

    def pose_at(self, t: float) -> tuple[np.ndarray, Quaternion]:
        """Pose at time t: exact sample when within tolerance, else linear position and slerp."""
        if len(self) == 0:
            raise DataError("Cannot look up a pose in an empty trajectory")
        if t < self.t[0] - TIME_TOL or t > self.t[-1] + TIME_TOL:
            raise ResamplingError(f"Time {t:.6f} s outside trajectory span [{self.t[0]:.6f}, {self.t[-1]:.6f}] s")
        idx = int(np.searchsorted(self.t, t))
        for candidate in (idx - 1, idx):
            if 0 <= candidate < len(self) and abs(self.t[candidate] - t) <= TIME_TOL:
                return self.p[candidate].copy(), Quaternion.from_array(self.q[candidate])
        lo, hi = idx - 1, idx
        u = (t - self.t[lo]) / (self.t[hi] - self.t[lo])
        p = self.p[lo] + u * (self.p[hi] - self.p[lo])
        q = Quaternion.from_array(self.q[lo]).slerp(Quaternion.from_array(self.q[hi]), u)
        return p, q
