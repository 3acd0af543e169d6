from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from imuguard.constants import AlignmentMode
from imuguard.evaluation.association import PosePairs
from imuguard.exceptions import ConfigurationError, RankDeficiencyError

RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AlignmentTransform:
    """x -> scale * R x + t mapping estimated positions onto the reference frame."""

    mode: AlignmentMode
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def apply_positions(self, p: np.ndarray) -> np.ndarray:
        return self.scale * np.asarray(p) @ self.rotation.T + self.translation


def umeyama(source: np.ndarray, target: np.ndarray, with_scale: bool) -> tuple[np.ndarray, np.ndarray, float]:
    """Least-squares rotation, translation and optional scale mapping source onto target."""
    n = source.shape[0]
    if n < 3:
        raise RankDeficiencyError(f"Alignment needs at least 3 pose pairs, got {n}")
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    xs = source - mu_s
    xt = target - mu_t
    spread = np.linalg.svd(xs, compute_uv=False)
    if spread[0] == 0.0 or spread[1] <= RANK_TOL * spread[0]:
        raise RankDeficiencyError("Estimated positions are collinear or coincident; the alignment is not unique")
    cov = xt.T @ xs / n
    U, D, Vt = np.linalg.svd(cov)
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2, 2] = -1.0
    R = U @ S @ Vt
    scale = 1.0
    if with_scale:
        var_s = float((xs**2).sum() / n)
        scale = float(np.trace(np.diag(D) @ S) / var_s)
    t = mu_t - scale * R @ mu_s
    return R, t, scale


def yaw_alignment(source: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation about z and translation minimising the squared position residual."""
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    xs = source - mu_s
    xt = target - mu_t
    a = float(np.sum(xt[:, 0] * xs[:, 0] + xt[:, 1] * xs[:, 1]))
    b = float(np.sum(xt[:, 1] * xs[:, 0] - xt[:, 0] * xs[:, 1]))
    theta = np.arctan2(b, a)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return R, mu_t - R @ mu_s


def align(pairs: PosePairs, mode: AlignmentMode | str) -> AlignmentTransform:
    """Closed-form alignment of estimated onto reference positions.

    se3 and sim3 use the Umeyama solution (sim3 also fits a global scale), posyaw
    fits a yaw rotation and a translation, none is the identity.
    """
    try:
        mode = AlignmentMode(mode)
    except ValueError as e:
        raise ConfigurationError(f"Unknown alignment mode '{mode}'") from e
    if mode is AlignmentMode.NONE:
        return AlignmentTransform(mode=mode)
    if mode is AlignmentMode.POSYAW:
        if len(pairs) == 0:
            raise RankDeficiencyError("posyaw alignment needs at least one pose pair")
        R, t = yaw_alignment(pairs.est_p, pairs.ref_p)
        return AlignmentTransform(mode=mode, rotation=R, translation=t)
    R, t, scale = umeyama(pairs.est_p, pairs.ref_p, with_scale=mode is AlignmentMode.SIM3)
    return AlignmentTransform(mode=mode, rotation=R, translation=t, scale=scale)
