from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from imuguard.constants import CALIBRATION_FLOOR
from imuguard.core.state import ImuStream
from imuguard.detect.templates import (
    LabeledRecording,
    Template,
    TemplateLibrary,
    best_distances,
    calibrate_dtw_threshold,
    extract_templates,
    k_medoids,
)
from imuguard.exceptions import (
    ConfigurationError,
    CorruptedReportError,
    DataError,
    InsufficientDataError,
    ShapeError,
)


def _library() -> TemplateLibrary:
    templates = [Template(id=f"flat-{j}", label="flat", series=np.full((10, 3), float(j))) for j in range(3)]
    return TemplateLibrary(templates, dims=3)


def test_k_medoids_two_clusters() -> None:
    """Two well separated groups give one medoid each, at their centres."""
    x = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    D = np.abs(x[:, None] - x[None, :])
    assert k_medoids(D, 2).tolist() == [1, 4]
    assert k_medoids(D, 6).tolist() == list(range(6))
    with pytest.raises(ConfigurationError):
        k_medoids(D, 7)


def test_extract_templates(noise_free_stream: ImuStream) -> None:
    """Templates are real recorded windows spread over the labels."""
    recordings = [
        LabeledRecording(label="a", stream=noise_free_stream[:500], source="first"),
        LabeledRecording(label="b", stream=noise_free_stream[500:], source="second"),
    ]
    library = extract_templates(recordings, N=10, k=4, gyro_weight=30.0)

    assert len(library) == 4
    assert library.dims == 6
    assert library.length == 10
    assert library.ids == ["a-0", "a-1", "b-0", "b-1"]
    assert library.labels == ["a", "b"]
    for template in library:
        rec = recordings[0] if template.label == "a" else recordings[1]
        assert template.offset % 10 == 0
        expected = rec.stream.channels(6, 30.0)[template.offset : template.offset + 10]
        assert np.array_equal(template.series, expected)


def test_extract_templates_needs_enough_data(noise_free_stream: ImuStream) -> None:
    """Fewer than k * N clean samples cannot yield k templates."""
    recordings = [LabeledRecording(label="a", stream=noise_free_stream[:50])]
    with pytest.raises(InsufficientDataError):
        extract_templates(recordings, N=10, k=6)


def test_library_save_and_load(tmp_path: Path) -> None:
    """The library file keeps ids, rows and the channel layout."""
    library = _library()
    path = tmp_path / "templates.json"
    library.save(path)
    loaded = TemplateLibrary.load(path)
    assert loaded.ids == library.ids
    assert loaded.dims == 3
    assert loaded.length == 10
    assert np.array_equal(loaded.get("flat-2").series, library.get("flat-2").series)

    data = json.loads(path.read_text())
    data["version"] = 99
    with pytest.raises(ConfigurationError):
        TemplateLibrary.from_dict(data)
    del data["templates"]
    data["version"] = 1
    with pytest.raises(DataError):
        TemplateLibrary.from_dict(data)


def test_library_validation() -> None:
    """Templates share one length and channel count, and ids are unique."""
    a = Template(id="a", label="x", series=np.zeros((10, 3)))
    with pytest.raises(ShapeError):
        TemplateLibrary([a, Template(id="b", label="x", series=np.zeros((12, 3)))], dims=3)
    with pytest.raises(ShapeError):
        TemplateLibrary([a], dims=6)
    with pytest.raises(ConfigurationError):
        TemplateLibrary([a, a], dims=3)
    with pytest.raises(CorruptedReportError):
        _library().get("missing")


def test_calibrate_dtw_threshold() -> None:
    """The threshold is the margin times an observed clean distance at the target quantile."""
    library = _library()
    validation = [np.full((10, 3), 2.0 + c / 10.0) for c in range(1, 101)]
    distances = np.sort(best_distances(library, validation))

    threshold = calibrate_dtw_threshold(library, validation, target_pass=0.99, margin=1.2)
    assert threshold == pytest.approx(1.2 * distances[98])
    assert np.mean(best_distances(library, validation) <= threshold) >= 0.99


def test_calibrate_floor_and_validation() -> None:
    """Perfect matches give the positive floor; bad arguments are rejected."""
    library = _library()
    assert calibrate_dtw_threshold(library, [np.zeros((10, 3))], target_pass=0.5) == CALIBRATION_FLOOR
    with pytest.raises(ConfigurationError):
        calibrate_dtw_threshold(library, [np.zeros((10, 3))], target_pass=1.0)
    with pytest.raises(InsufficientDataError):
        calibrate_dtw_threshold(library, [], target_pass=0.9)
