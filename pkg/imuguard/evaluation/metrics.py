from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import polars as pl

from imuguard.__init__ import console
from imuguard.constants import DEFAULT_RELATIVE_LENGTHS, AlignmentMode
from imuguard.core.quaternion import matrices_from_quaternions
from imuguard.core.state import Trajectory
from imuguard.evaluation.alignment import AlignmentTransform, align
from imuguard.evaluation.association import PosePairs, associate
from imuguard.exceptions import ConfigurationError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


@dataclass(frozen=True)
class RelativeErrorStats:
    """Relative translation (m) and yaw (deg) errors over all start poses for one length."""

    length: float
    count: int
    translation_mean: float
    translation_median: float
    yaw_mean_deg: float
    yaw_median_deg: float


@dataclass
class MetricReport:
    """Accuracy of an estimated trajectory against its reference.

    Per-length statistics are the mean over all valid start poses; medians are
    reported alongside.
    """

    ate_rmse: float
    alignment: AlignmentMode
    scale: float
    max_dt: float
    pairs: int
    unmatched: int
    relative: list[RelativeErrorStats] = field(default_factory=list)
    skipped_lengths: list[float] = field(default_factory=list)

    @staticmethod
    def length_key(length: float) -> str:
        return f"{length:.2f}"

    @property
    def rel_translation(self) -> dict[str, float]:
        return {self.length_key(r.length): r.translation_mean for r in self.relative}

    @property
    def rel_yaw(self) -> dict[str, float]:
        return {self.length_key(r.length): r.yaw_mean_deg for r in self.relative}

    def to_dict(self) -> dict[str, Any]:
        return {
            "statistic": "mean",
            "ate_rmse": self.ate_rmse,
            "alignment": self.alignment.value,
            "scale": self.scale,
            "association_max_dt": self.max_dt,
            "pairs": self.pairs,
            "unmatched": self.unmatched,
            "rel_translation": self.rel_translation,
            "rel_yaw": self.rel_yaw,
            "rel_translation_median": {self.length_key(r.length): r.translation_median for r in self.relative},
            "rel_yaw_median": {self.length_key(r.length): r.yaw_median_deg for r in self.relative},
            "rel_count": {self.length_key(r.length): r.count for r in self.relative},
            "skipped_lengths": self.skipped_lengths,
        }

    def relative_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "length_m": [r.length for r in self.relative],
                "count": [r.count for r in self.relative],
                "translation_mean_m": [r.translation_mean for r in self.relative],
                "translation_median_m": [r.translation_median for r in self.relative],
                "yaw_mean_deg": [r.yaw_mean_deg for r in self.relative],
                "yaw_median_deg": [r.yaw_median_deg for r in self.relative],
            },
            schema={
                "length_m": pl.Float64,
                "count": pl.Int64,
                "translation_mean_m": pl.Float64,
                "translation_median_m": pl.Float64,
                "yaw_mean_deg": pl.Float64,
                "yaw_median_deg": pl.Float64,
            },
        )

    def write_csv(self, path: str | Path) -> None:
        self.relative_frame().write_csv(path)


def ate_rmse(pairs: PosePairs, transform: AlignmentTransform) -> float:
    """Root mean square of the aligned position residuals."""
    residual = pairs.ref_p - transform.apply_positions(pairs.est_p)
    return float(np.sqrt(np.mean(np.sum(residual**2, axis=1))))


def _relative_motion(R: np.ndarray, p: np.ndarray, i: np.ndarray, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Ri_t = np.transpose(R[i], (0, 2, 1))
    dR = Ri_t @ R[j]
    dp = np.einsum("nab,nb->na", Ri_t, p[j] - p[i])
    return dR, dp


def relative_errors(pairs: PosePairs, lengths: Sequence[float] = DEFAULT_RELATIVE_LENGTHS) -> list[RelativeErrorStats]:
    """Relative pose errors over sub-trajectories of fixed reference path length.

    For every start pose i the end pose is the first j at which the reference path
    length travelled since i exceeds L. The error transform is
    inv(ref_i^-1 ref_j) (est_i^-1 est_j); its translation norm and the absolute yaw
    of its rotation (ZYX) are collected. Lengths longer than the reference path
    are skipped with a warning.
    """
    lengths = [float(L) for L in lengths]
    if any(L <= 0 for L in lengths):
        raise ConfigurationError(f"Relative-error lengths must be positive, got {lengths}")
    if sorted(lengths) != lengths or len(set(lengths)) != len(lengths):
        raise ConfigurationError(f"Relative-error lengths must be strictly ascending, got {lengths}")

    steps = np.linalg.norm(np.diff(pairs.ref_p, axis=0), axis=1)
    travelled = np.concatenate([[0.0], np.cumsum(steps)])
    R_ref = matrices_from_quaternions(pairs.ref_q)
    R_est = matrices_from_quaternions(pairs.est_q)

    out = []
    for L in lengths:
        ends = np.searchsorted(travelled, travelled + L, side="right")
        valid = np.flatnonzero(ends < len(pairs))
        if valid.size == 0:
            logger.warning(f"Reference path of {travelled[-1]:.2f} m is too short for length {L:g} m; skipped")
            continue
        i = valid
        j = ends[valid]
        dR_ref, dp_ref = _relative_motion(R_ref, pairs.ref_p, i, j)
        dR_est, dp_est = _relative_motion(R_est, pairs.est_p, i, j)
        dR_ref_t = np.transpose(dR_ref, (0, 2, 1))
        E_R = dR_ref_t @ dR_est
        E_t = np.einsum("nab,nb->na", dR_ref_t, dp_est - dp_ref)
        trans = np.linalg.norm(E_t, axis=1)
        yaw = np.abs(np.degrees(np.arctan2(E_R[:, 1, 0], E_R[:, 0, 0])))
        out.append(
            RelativeErrorStats(
                length=L,
                count=int(valid.size),
                translation_mean=float(trans.mean()),
                translation_median=float(np.median(trans)),
                yaw_mean_deg=float(yaw.mean()),
                yaw_median_deg=float(np.median(yaw)),
            )
        )
    return out


def evaluate(
    est: Trajectory,
    ref: Trajectory,
    alignment: AlignmentMode | str = AlignmentMode.SE3,
    lengths: Sequence[float] = DEFAULT_RELATIVE_LENGTHS,
    max_dt: float | None = None,
) -> MetricReport:
    """Associate, align and compute ATE RMSE plus relative errors."""
    pairs = associate(est, ref, max_dt=max_dt)
    transform = align(pairs, alignment)
    relative = relative_errors(pairs, lengths)
    evaluated = {r.length for r in relative}
    report = MetricReport(
        ate_rmse=ate_rmse(pairs, transform),
        alignment=transform.mode,
        scale=transform.scale,
        max_dt=pairs.max_dt,
        pairs=len(pairs),
        unmatched=pairs.unmatched,
        relative=relative,
        skipped_lengths=[float(L) for L in lengths if float(L) not in evaluated],
    )
    logger.debug(f"ATE RMSE {report.ate_rmse:.4f} m over {report.pairs} poses ({transform.mode.value})")
    return report
