from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import TIME_TOL
from imuguard.core.state import Trajectory
from imuguard.exceptions import ConfigurationError, EmptyInputError, NoOverlapError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


@dataclass(eq=False)
class PosePairs:
    """Estimated and reference poses matched by timestamp (estimate timestamps kept)."""

    t: np.ndarray
    est_p: np.ndarray
    est_q: np.ndarray
    ref_p: np.ndarray
    ref_q: np.ndarray
    max_dt: float
    unmatched: int = 0

    def __len__(self) -> int:
        return int(self.t.shape[0])


def default_max_dt(est: Trajectory, ref: Trajectory) -> float:
    """Half the nominal (median) spacing of the estimate, or of the reference."""
    for traj in (est, ref):
        if len(traj) > 1:
            return 0.5 * float(np.median(np.diff(traj.t)))
    return TIME_TOL


def associate(est: Trajectory, ref: Trajectory, max_dt: float | None = None) -> PosePairs:
    """Pair every estimated pose with the nearest reference pose within `max_dt`.

    Each reference pose is used at most once. Estimated poses without a partner are
    dropped and counted.
    """
    if len(est) == 0 or len(ref) == 0:
        raise EmptyInputError("Association needs two non-empty trajectories")
    if max_dt is None:
        max_dt = default_max_dt(est, ref)
    if max_dt < 0:
        raise ConfigurationError(f"max_dt must be >= 0, got {max_dt}")

    idx = np.clip(np.searchsorted(ref.t, est.t), 1, len(ref) - 1) if len(ref) > 1 else np.zeros(len(est), dtype=int)
    if len(ref) > 1:
        before = idx - 1
        closer_before = np.abs(est.t - ref.t[before]) <= np.abs(ref.t[idx] - est.t)
        idx = np.where(closer_before, before, idx)
    within = np.abs(ref.t[idx] - est.t) <= max_dt + TIME_TOL

    used: set[int] = set()
    keep_est: list[int] = []
    keep_ref: list[int] = []
    for i in np.flatnonzero(within):
        j = int(idx[i])
        if j in used:
            continue
        used.add(j)
        keep_est.append(int(i))
        keep_ref.append(j)

    if not keep_est:
        raise NoOverlapError(
            f"No poses within {max_dt:.6g} s: estimate spans [{est.t[0]:.3f}, {est.t[-1]:.3f}] s, "
            f"reference spans [{ref.t[0]:.3f}, {ref.t[-1]:.3f}] s"
        )
    unmatched = len(est) - len(keep_est)
    if unmatched:
        logger.debug(f"Association dropped {unmatched} of {len(est)} estimated poses")
    e = np.array(keep_est)
    r = np.array(keep_ref)
    return PosePairs(
        t=est.t[e],
        est_p=est.p[e],
        est_q=est.q[e],
        ref_p=ref.p[r],
        ref_q=ref.q[r],
        max_dt=float(max_dt),
        unmatched=unmatched,
    )
