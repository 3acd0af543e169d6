from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Any

import numpy as np
import polars as pl

from imuguard.__init__ import console
from imuguard.constants import IMU_ACC_COLUMNS, IMU_GYRO_COLUMNS, TUM_COLUMNS
from imuguard.core.quaternion import Quaternion
from imuguard.core.state import ImuStream, NavState, Trajectory
from imuguard.exceptions import DataError, ShapeError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


def read_imu_csv(path: str | Path) -> ImuStream:
    """Read an IMU CSV with header `t,ax,ay,az[,gx,gy,gz]` (seconds, SI units)."""
    try:
        df = pl.read_csv(path, infer_schema_length=0)
    except (pl.exceptions.ComputeError, pl.exceptions.NoDataError) as e:
        raise DataError(f"Cannot parse IMU CSV '{path}': {e}") from e
    required = ["t", *IMU_ACC_COLUMNS]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise DataError(f"IMU CSV '{path}' is missing columns {missing}; expected t,ax,ay,az[,gx,gy,gz]")
    gyro_present = [c for c in IMU_GYRO_COLUMNS if c in df.columns]
    if gyro_present and len(gyro_present) != len(IMU_GYRO_COLUMNS):
        raise DataError(f"IMU CSV '{path}' has only some gyroscope columns: {gyro_present}")
    columns = required + gyro_present
    try:
        df = df.select([pl.col(c).str.strip_chars().cast(pl.Float64, strict=True) for c in columns])
    except (pl.exceptions.InvalidOperationError, pl.exceptions.ComputeError) as e:
        raise DataError(f"IMU CSV '{path}' has non-numeric values: {e}") from e
    if df.null_count().sum_horizontal().item() > 0:
        raise DataError(f"IMU CSV '{path}' has empty fields")
    stream = ImuStream(
        t=df["t"].to_numpy(),
        acc=df.select(IMU_ACC_COLUMNS).to_numpy(),
        gyro=df.select(IMU_GYRO_COLUMNS).to_numpy() if gyro_present else None,
    )
    logger.debug(f"Read {len(stream)} IMU samples from '{path}'")
    return stream


def imu_frame(stream: ImuStream) -> pl.DataFrame:
    data: dict[str, np.ndarray] = {"t": stream.t}
    for i, name in enumerate(IMU_ACC_COLUMNS):
        data[name] = stream.acc[:, i]
    if stream.gyro is not None:
        for i, name in enumerate(IMU_GYRO_COLUMNS):
            data[name] = stream.gyro[:, i]
    return pl.DataFrame(data, schema={k: pl.Float64 for k in data})


def write_imu_csv(stream: ImuStream, path: str | Path) -> None:
    imu_frame(stream).write_csv(path)


def read_tum(path: str | Path) -> Trajectory:
    """Read a TUM trajectory `t x y z qx qy qz qw`; '#' starts a comment."""
    try:
        rows = np.loadtxt(path, comments="#", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise DataError(f"Cannot parse TUM file '{path}': {e}") from e
    if rows.size == 0:
        return Trajectory(t=np.zeros(0), p=np.zeros((0, 3)), q=np.zeros((0, 4)))
    if rows.shape[1] != len(TUM_COLUMNS):
        raise ShapeError(f"TUM file '{path}' has {rows.shape[1]} columns, expected {len(TUM_COLUMNS)}")
    # TUM stores (qx, qy, qz, qw); imuguard stores (w, x, y, z)
    q = np.column_stack([rows[:, 7], rows[:, 4:7]])
    return Trajectory.from_unnormalized(t=rows[:, 0], p=rows[:, 1:4], q=q)


def tum_frame(traj: Trajectory) -> pl.DataFrame:
    columns = np.column_stack([traj.t, traj.p, traj.q[:, 1:4], traj.q[:, 0]])
    return pl.DataFrame({name: columns[:, i] for i, name in enumerate(TUM_COLUMNS)})


def write_tum(traj: Trajectory, path: str | Path) -> None:
    buffer = io.StringIO()
    tum_frame(traj).write_csv(buffer, separator=" ", include_header=False)
    Path(path).write_text("# " + " ".join(TUM_COLUMNS) + "\n" + buffer.getvalue(), encoding="utf-8")


def write_json(data: Any, path: str | Path) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"Invalid JSON in '{path}': {e}") from e


def state_to_dict(state: NavState) -> dict[str, Any]:
    return {"t": state.t, "p": state.p.tolist(), "v": state.v.tolist(), "q": state.q.as_array().tolist()}


def write_initial_state(state: NavState, path: str | Path) -> None:
    write_json(state_to_dict(state), path)


def read_initial_state(path: str | Path) -> NavState:
    data = read_json(path)
    try:
        q = Quaternion.from_array(data["q"]).normalized()
        return NavState(t=float(data["t"]), p=np.asarray(data["p"]), v=np.asarray(data.get("v", [0.0, 0.0, 0.0])), q=q)
    except (KeyError, TypeError) as e:
        raise DataError(f"Initial state '{path}' needs t, p, v and q=[w, x, y, z]: {e}") from e


def write_mask(mask: np.ndarray, path: str | Path) -> None:
    write_json({"length": int(mask.shape[0]), "indices": np.flatnonzero(mask).tolist()}, path)


def read_mask(path: str | Path) -> np.ndarray:
    data = read_json(path)
    try:
        mask = np.zeros(int(data["length"]), dtype=bool)
        mask[np.asarray(data["indices"], dtype=int)] = True
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise DataError(f"Invalid fault mask '{path}': {e}") from e
    return mask
