from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import DEFAULT_MAX_GAP_FACTOR, TIME_TOL, IntegrationMethod
from imuguard.core.quaternion import Quaternion, exp_map, quat_multiply, rotate_many
from imuguard.core.state import ImuBias, ImuSample, ImuStream, NavState, Trajectory, WorldModel
from imuguard.exceptions import ConfigurationError, EmptyInputError, GapError, OrderingError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


@dataclass(frozen=True, eq=False)
class IntegratorConfig:
    """Settings of the strapdown integrator.

    Attributes:
        method: Euler or midpoint discretisation.
        world: Gravity model removed from the rotated specific force.
        bias: Sensor offsets subtracted before integration.
        anchor_period: Seconds between pose resets, requires `anchor_source`.
        anchor_source: Reference trajectory providing the reset poses.
        max_gap: Largest accepted sample spacing in seconds. When None, `integrate`
            uses five times the median spacing of the stream.
    """

    method: IntegrationMethod = IntegrationMethod.MIDPOINT
    world: WorldModel = field(default_factory=WorldModel)
    bias: ImuBias = field(default_factory=ImuBias)
    anchor_period: float | None = None
    anchor_source: Trajectory | None = None
    max_gap: float | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "method", IntegrationMethod(self.method))
        except ValueError as e:
            raise ConfigurationError(f"Unknown integration method '{self.method}'") from e
        if self.anchor_source is not None:
            if self.anchor_period is None or not self.anchor_period > 0:
                raise ConfigurationError(f"anchor_period must be > 0 when an anchor source is given, got {self.anchor_period}")
            if len(self.anchor_source) == 0:
                raise ConfigurationError("anchor_source trajectory is empty")
        elif self.anchor_period is not None:
            raise ConfigurationError("anchor_period is set but no anchor_source was given")
        if self.max_gap is not None and not self.max_gap > 0:
            raise ConfigurationError(f"max_gap must be > 0, got {self.max_gap}")

    @property
    def anchored(self) -> bool:
        return self.anchor_source is not None


def _propagate(
    p: np.ndarray,
    v: np.ndarray,
    q: np.ndarray,
    acc_prev: np.ndarray,
    acc_curr: np.ndarray,
    gyro_prev: np.ndarray,
    gyro_curr: np.ndarray,
    dt: float,
    cfg: IntegratorConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    g = cfg.world.gravity
    if cfg.method is IntegrationMethod.EULER:
        omega = gyro_prev - cfg.bias.gyro
        acc_world = rotate_many(q, (acc_prev - cfg.bias.acc)[None])[0] - g
        q_next = quat_multiply(q, exp_map(omega * dt))
        q_next = q_next / np.linalg.norm(q_next)
    else:
        omega = 0.5 * ((gyro_prev - cfg.bias.gyro) + (gyro_curr - cfg.bias.gyro))
        q_next = quat_multiply(q, exp_map(omega * dt))
        q_next = q_next / np.linalg.norm(q_next)
        a_prev = rotate_many(q, (acc_prev - cfg.bias.acc)[None])[0] - g
        a_curr = rotate_many(q_next, (acc_curr - cfg.bias.acc)[None])[0] - g
        acc_world = 0.5 * (a_prev + a_curr)
    p_next = p + v * dt + 0.5 * acc_world * dt * dt
    v_next = v + acc_world * dt
    return p_next, v_next, q_next


def _gyro_or_zero(gyro: np.ndarray | None) -> np.ndarray:
    return np.zeros(3) if gyro is None else gyro


def step(state: NavState, prev: ImuSample, curr: ImuSample, cfg: IntegratorConfig) -> NavState:
    """Propagate `state` (taken at `prev.t`) to `curr.t`.

    Missing gyroscope readings are treated as zero angular rate.
    """
    dt = curr.t - prev.t
    if dt <= 0.0:
        raise OrderingError(f"Samples must advance in time, got t={prev.t!r} then t={curr.t!r}")
    if abs(state.t - prev.t) > TIME_TOL:
        raise OrderingError(f"State time {state.t!r} does not match the previous sample time {prev.t!r}")
    if cfg.max_gap is not None and dt > cfg.max_gap:
        raise GapError(f"Gap of {dt:.6f} s between t={prev.t:.6f} and t={curr.t:.6f} exceeds max gap {cfg.max_gap:.6f} s")
    p, v, q = _propagate(
        state.p,
        state.v,
        state.q.as_array(),
        prev.acc,
        curr.acc,
        _gyro_or_zero(prev.gyro),
        _gyro_or_zero(curr.gyro),
        dt,
        cfg,
    )
    return NavState(t=curr.t, p=p, v=v, q=Quaternion.from_array(q))


def integrate(initial: NavState, stream: ImuStream, cfg: IntegratorConfig) -> Trajectory:
    """Dead-reckon a stream into one pose per sample.

    When `initial.t` precedes the first sample, the first reading is held over the
    bridging interval. With anchoring, position and orientation (never velocity) are
    reset to the anchor source every `anchor_period` seconds, starting at the first
    sample.

    Args:
        initial: State at or before the first sample.
        stream: Time-ordered IMU readings.
        cfg: Integrator settings.

    Returns:
        Trajectory: Integrated poses and velocities at the sample times.
    """
    n = len(stream)
    if n == 0:
        raise EmptyInputError("Cannot integrate an empty IMU stream")
    t = stream.t
    if initial.t > t[0] + TIME_TOL:
        raise OrderingError(f"Initial state at t={initial.t:.6f} is after the first sample at t={t[0]:.6f}")

    max_gap = cfg.max_gap
    if max_gap is None and n > 1:
        max_gap = DEFAULT_MAX_GAP_FACTOR * stream.nominal_period()
    gyro = stream.gyro if stream.gyro is not None else np.zeros_like(stream.acc)
    if stream.gyro is None:
        logger.debug("Stream has no gyroscope channels; orientation is held constant")

    p = initial.p.copy()
    v = initial.v.copy()
    q = initial.q.as_array()
    if t[0] - initial.t > TIME_TOL:
        p, v, q = _propagate(p, v, q, stream.acc[0], stream.acc[0], gyro[0], gyro[0], t[0] - initial.t, cfg)

    out_p = np.empty((n, 3))
    out_v = np.empty((n, 3))
    out_q = np.empty((n, 4))
    next_anchor = 0
    anchors_applied = 0

    for i in range(n):
        if i > 0:
            dt = t[i] - t[i - 1]
            if max_gap is not None and dt > max_gap:
                raise GapError(f"Gap of {dt:.6f} s between samples {i - 1} and {i} exceeds max gap {max_gap:.6f} s")
            p, v, q = _propagate(p, v, q, stream.acc[i - 1], stream.acc[i], gyro[i - 1], gyro[i], dt, cfg)
        if cfg.anchor_source is not None and cfg.anchor_period is not None:
            anchor_time = t[0] + next_anchor * cfg.anchor_period
            if t[i] >= anchor_time - TIME_TOL:
                anchor_p, anchor_q = cfg.anchor_source.pose_at(t[i])
                p = anchor_p
                q = anchor_q.as_array()
                anchors_applied += 1
                while t[0] + next_anchor * cfg.anchor_period <= t[i] + TIME_TOL:
                    next_anchor += 1
        out_p[i] = p
        out_v[i] = v
        out_q[i] = q

    logger.debug(f"Integrated {n} samples with {cfg.method.value} ({anchors_applied} anchor resets)")
    return Trajectory(t=t.copy(), p=out_p, q=out_q, v=out_v)
