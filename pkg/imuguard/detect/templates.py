from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import (
    CALIBRATION_FLOOR,
    CALIBRATION_MARGIN,
    DEFAULT_GYRO_WEIGHT,
    TEMPLATE_LIBRARY_VERSION,
)
from imuguard.core.state import ImuStream
from imuguard.dtw.kernel import pairwise_distances, zscore
from imuguard.dtw.matcher import TemplateMatcher
from imuguard.exceptions import (
    ConfigurationError,
    CorruptedReportError,
    DataError,
    ImuGuardError,
    InsufficientDataError,
    ShapeError,
)
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


@dataclass(frozen=True, eq=False)
class Template:
    """Known-good window of N rows and its provenance."""

    id: str
    label: str
    series: np.ndarray
    source: str = ""
    offset: int = 0

    @property
    def length(self) -> int:
        return int(self.series.shape[0])


@dataclass(frozen=True, eq=False)
class LabeledRecording:
    """A clean recording of one motion pattern."""

    label: str
    stream: ImuStream
    source: str = ""


class TemplateLibrary:
    """Equally long templates with a shared channel layout.

    Six-channel templates hold (ax, ay, az, w*gx, w*gy, w*gz) with w the gyro weight.
    """

    def __init__(
        self,
        templates: Sequence[Template],
        dims: int,
        gyro_weight: float = DEFAULT_GYRO_WEIGHT,
        version: int = TEMPLATE_LIBRARY_VERSION,
    ) -> None:
        if dims not in (3, 6):
            raise ConfigurationError(f"Template dimension must be 3 or 6, got {dims}")
        if not gyro_weight > 0:
            raise ConfigurationError(f"gyro_weight must be > 0, got {gyro_weight}")
        lengths = {t.length for t in templates}
        if len(lengths) > 1:
            raise ShapeError(f"Templates have mixed lengths: {sorted(lengths)}")
        for t in templates:
            if t.series.ndim != 2 or t.series.shape[1] != dims:
                raise ShapeError(f"Template '{t.id}' has shape {t.series.shape}, expected (N, {dims})")
            if t.length < 1 or not np.all(np.isfinite(t.series)):
                raise DataError(f"Template '{t.id}' must have at least one row of finite values")
        ids = [t.id for t in templates]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("Template ids must be unique")
        self.templates = list(templates)
        self.dims = dims
        self.gyro_weight = float(gyro_weight)
        self.version = version
        self._by_id = {t.id: t for t in self.templates}

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    @property
    def length(self) -> int:
        return self.templates[0].length if self.templates else 0

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.templates]

    @property
    def labels(self) -> list[str]:
        return sorted({t.label for t in self.templates})

    def get(self, template_id: str) -> Template:
        try:
            return self._by_id[template_id]
        except KeyError as e:
            raise CorruptedReportError(f"Template '{template_id}' is not in the library") from e

    def stack(self, znormalize: bool = False) -> np.ndarray:
        series = [zscore(t.series) if znormalize else t.series for t in self.templates]
        return np.ascontiguousarray(np.stack(series))

    def envelope(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-channel minimum and maximum over all template rows."""
        rows = np.concatenate([t.series for t in self.templates])
        return rows.min(axis=0), rows.max(axis=0)

    def matcher(self, parallelism: int = 1, znormalize: bool = False) -> TemplateMatcher:
        return TemplateMatcher(list(self.stack(znormalize)), ids=self.ids, parallelism=parallelism)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "d": self.dims,
            "N": self.length,
            "gyro_weight": self.gyro_weight,
            "templates": [
                {"id": t.id, "label": t.label, "rows": t.series.tolist(), "source": t.source, "offset": t.offset}
                for t in self.templates
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TemplateLibrary:
        try:
            version = int(data["version"])
            if version != TEMPLATE_LIBRARY_VERSION:
                raise ConfigurationError(f"Unsupported template library version {version}")
            templates = [
                Template(
                    id=str(t["id"]),
                    label=str(t["label"]),
                    series=np.asarray(t["rows"], dtype=np.float64).reshape(-1, int(data["d"])),
                    source=str(t.get("source", "")),
                    offset=int(t.get("offset", 0)),
                )
                for t in data["templates"]
            ]
            library = cls(templates, dims=int(data["d"]), gyro_weight=float(data["gyro_weight"]), version=version)
        except ImuGuardError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Malformed template library: {e}") from e
        if templates and library.length != int(data["N"]):
            raise ShapeError(f"Library declares N={data['N']} but templates have {library.length} rows")
        return library

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> TemplateLibrary:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def k_medoids(D: np.ndarray, k: int, max_iter: int = 100) -> np.ndarray:
    """Deterministic k-medoids on a precomputed distance matrix.

    Greedy initialisation (first the most central point, then the point that most
    reduces the total distance to the nearest medoid) followed by alternating
    assignment and medoid updates. Ties go to the lowest index.

    Returns:
        np.ndarray: Sorted medoid indices.
    """
    n = D.shape[0]
    if not 1 <= k <= n:
        raise ConfigurationError(f"Cannot choose {k} medoids from {n} points")
    medoids = [int(np.argmin(D.sum(axis=1)))]
    nearest = D[medoids[0]].copy()
    for _ in range(1, k):
        gain = np.maximum(nearest[None, :] - D, 0.0).sum(axis=1)
        gain[medoids] = -1.0
        m = int(np.argmax(gain))
        medoids.append(m)
        nearest = np.minimum(nearest, D[m])

    M = np.array(medoids)
    for _ in range(max_iter):
        assignment = np.argmin(D[:, M], axis=1)
        assignment[M] = np.arange(k)
        updated = M.copy()
        for cluster in range(k):
            members = np.flatnonzero(assignment == cluster)
            within = D[np.ix_(members, members)].sum(axis=1)
            updated[cluster] = members[int(np.argmin(within))]
        if np.array_equal(updated, M):
            break
        M = updated
    return np.sort(M)


def _allocate(counts: dict[str, int], k: int) -> dict[str, int]:
    """Round-robin allocation of k templates over labels, bounded by their window counts."""
    alloc = {label: 0 for label in counts}
    remaining = k
    while remaining > 0:
        progressed = False
        for label in counts:
            if remaining == 0:
                break
            if alloc[label] < counts[label]:
                alloc[label] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            break
    return alloc


def extract_templates(
    recordings: Sequence[LabeledRecording],
    N: int,
    k: int,
    dims: int | None = None,
    gyro_weight: float = DEFAULT_GYRO_WEIGHT,
) -> TemplateLibrary:
    """Select k representative windows of N samples from clean recordings.

    Candidates are the non-overlapping N-sample windows of every recording. The k
    templates are spread over the labels round-robin and chosen per label as the
    k-medoids of the candidates under DTW distance, so every template is a real
    recorded window.

    Args:
        recordings: Clean recordings, each with a motion label.
        N: Template length in samples.
        k: Number of templates.
        dims: 3 or 6 channels; defaults to 6 when every recording has gyroscope data.
        gyro_weight: Scale of the gyroscope channels in six-channel templates.

    Returns:
        TemplateLibrary: The selected templates with labels and source offsets.
    """
    if N < 1 or k < 1:
        raise ConfigurationError(f"Template length and count must be positive, got N={N}, k={k}")
    total = sum(len(r.stream) for r in recordings)
    if total < k * N:
        raise InsufficientDataError(f"Need at least k*N = {k * N} clean samples, got {total}")
    if dims is None:
        dims = 6 if recordings and all(r.stream.has_gyro for r in recordings) else 3

    candidates: dict[str, list[tuple[np.ndarray, str, int]]] = {}
    for rec_index, rec in enumerate(recordings):
        channels = rec.stream.channels(dims, gyro_weight)
        source = rec.source or f"recording-{rec_index}"
        windows = candidates.setdefault(rec.label, [])
        for start in range(0, len(rec.stream) - N + 1, N):
            windows.append((channels[start : start + N], source, start))

    available = sum(len(w) for w in candidates.values())
    if available < k:
        raise InsufficientDataError(f"Only {available} non-overlapping windows of {N} samples for k = {k}")
    allocation = _allocate({label: len(w) for label, w in candidates.items()}, k)

    templates: list[Template] = []
    for label, windows in candidates.items():
        count = allocation[label]
        if count == 0:
            continue
        D = pairwise_distances([w[0] for w in windows])
        for j, idx in enumerate(k_medoids(D, count)):
            series, source, offset = windows[int(idx)]
            templates.append(Template(id=f"{label}-{j}", label=label, series=series.copy(), source=source, offset=offset))
        logger.info(f"Label '{label}': {count} templates from {len(windows)} candidate windows")
    return TemplateLibrary(templates, dims=dims, gyro_weight=gyro_weight)


def best_distances(
    library: TemplateLibrary,
    series: Sequence[np.ndarray],
    parallelism: int = 1,
    znormalize: bool = False,
) -> np.ndarray:
    """Best-match distance of each series against the library."""
    with library.matcher(parallelism=parallelism, znormalize=znormalize) as matcher:
        return np.array([matcher.best(zscore(s) if znormalize else s).distance for s in series])


def calibrate_dtw_threshold(
    library: TemplateLibrary,
    validation: Sequence[np.ndarray],
    target_pass: float,
    margin: float = CALIBRATION_MARGIN,
    parallelism: int = 1,
    znormalize: bool = False,
) -> float:
    """DTW decision threshold admitting a target fraction of clean slices.

    The threshold is `margin` times the `target_pass` quantile (inverted empirical
    CDF, i.e. an observed distance) of the best-match distances of the clean
    validation slices, floored at a small positive value.
    """
    if not 0.0 < target_pass < 1.0:
        raise ConfigurationError(f"target_pass must be in (0, 1), got {target_pass}")
    if len(validation) == 0:
        raise InsufficientDataError("Threshold calibration needs at least one clean validation slice")
    if len(library) == 0:
        raise ConfigurationError("Threshold calibration needs a non-empty template library")
    distances = best_distances(library, validation, parallelism=parallelism, znormalize=znormalize)
    quantile = float(np.quantile(distances, target_pass, method="inverted_cdf"))
    threshold = max(margin * quantile, CALIBRATION_FLOOR)
    logger.info(f"Calibrated DTW threshold {threshold:.6g} from {len(validation)} clean slices (q{target_pass:g} = {quantile:.6g})")
    return threshold
