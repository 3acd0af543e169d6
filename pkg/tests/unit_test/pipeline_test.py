from __future__ import annotations

import copy
import json
from dataclasses import replace
from pathlib import Path

import pytest
from omegaconf import DictConfig, OmegaConf

from imuguard.constants import DetectorMode, MitigationMode, TrajectoryShape
from imuguard.exceptions import ConfigurationError, StageError
from imuguard.pipeline import PipelineConfig, PipelineResult, load_pipeline_config, run_pipeline

VARIANT_FILES = ["cleaned.csv", "trajectory.tum", "metrics.json", "relative_errors.csv"]


@pytest.fixture(scope="module")
def pipeline_run(pipeline_config: DictConfig, tmp_path_factory: pytest.TempPathFactory) -> PipelineResult:
    cfg = replace(PipelineConfig.from_dictconfig(pipeline_config), output_dir=tmp_path_factory.mktemp("run"))
    return run_pipeline(cfg)


def test_config_from_hydra(pipeline_config: DictConfig) -> None:
    """The composed tree becomes a validated run description."""
    cfg = PipelineConfig.from_dictconfig(pipeline_config)
    assert cfg.trajectory.shape is TrajectoryShape.ELLIPSE3D
    assert cfg.trajectory.pose_count == 1000
    assert cfg.glitch_preset == "n50_10"
    assert (cfg.glitch.mu, cfg.glitch.sigma) == (50.0, 10.0)
    assert cfg.noise.seed == cfg.seed
    assert cfg.glitch.seed == cfg.seed + 1
    assert cfg.templates.recording_seeds == (101,)
    assert cfg.lengths == (7.0, 14.0)
    assert [(v.name, v.detector, v.mitigation) for v in cfg.variants] == [
        ("raw", DetectorMode.NONE, MitigationMode.NONE),
        ("threshold", DetectorMode.THRESHOLD, MitigationMode.CLAMP),
        ("dtw", DetectorMode.DTW, MitigationMode.TEMPLATE_SUBSTITUTION),
    ]
    assert cfg.uses_dtw


def test_run_writes_every_artifact(pipeline_run: PipelineResult) -> None:
    run_dir = pipeline_run.run_dir
    for name in ["truth.tum", "clean.csv", "corrupted.csv", "mask.json", "initial_state.json", "templates.json", "summary.json"]:
        assert (run_dir / name).is_file(), name
    for variant in ["raw", "threshold", "dtw"]:
        for name in VARIANT_FILES:
            assert (run_dir / variant / name).is_file(), f"{variant}/{name}"
    assert not (run_dir / "raw" / "report.jsonl").exists()
    assert (run_dir / "threshold" / "mitigation_log.json").is_file()
    assert (run_dir / "dtw" / "report.jsonl").is_file()


def test_summary(pipeline_run: PipelineResult) -> None:
    summary = json.loads((pipeline_run.run_dir / "summary.json").read_text())
    assert summary == json.loads(json.dumps(pipeline_run.summary))
    assert summary["schema_version"] == 1
    assert summary["preset"] == "n50_10"
    assert summary["templates"] == 25
    assert summary["dtw_threshold"] > 0
    assert list(summary["variants"]) == ["dtw", "raw", "threshold"]
    raw = summary["variants"]["raw"]
    assert raw["detector"] == "none"
    assert raw["abnormal_records"] is None
    assert set(raw["rel_translation"]) == {"7.00", "14.00"}
    assert summary["variants"]["threshold"]["changed_samples"] >= 1
    assert set(summary["detection"]) == {"threshold", "dtw"}
    assert summary["detection"]["threshold"]["recall"] >= 0.9


def test_recorded_inputs(pipeline_config: DictConfig, pipeline_run: PipelineResult, tmp_path: Path) -> None:
    """Recorded IMU and truth files replace the simulator."""
    run_dir = pipeline_run.run_dir
    config = copy.deepcopy(pipeline_config)
    OmegaConf.set_struct(config, False)
    config.inputs.imu_path = str(run_dir / "corrupted.csv")
    config.inputs.truth_path = str(run_dir / "truth.tum")
    config.inputs.initial_state_path = str(run_dir / "initial_state.json")
    config.variants = {"raw": {"detector": "none", "mitigation": "none"}, "threshold": {"detector": "threshold", "mitigation": "moving_average"}}
    cfg = replace(PipelineConfig.from_dictconfig(config), output_dir=tmp_path)
    result = run_pipeline(cfg)

    assert not (tmp_path / "clean.csv").exists()
    assert result.summary["templates"] is None
    assert result.summary["detection"] == {}
    raw_ate = pipeline_run.summary["variants"]["raw"]["ate_rmse"]
    assert result.summary["variants"]["raw"]["ate_rmse"] == pytest.approx(raw_ate, rel=1e-6)


def test_incompatible_variant() -> None:
    config = load_pipeline_config(overrides=["variants.threshold.mitigation=template_substitution"], config_name="pipeline_unit_test")
    with pytest.raises(ConfigurationError, match="requires dtw detection"):
        PipelineConfig.from_dictconfig(config)


@pytest.mark.parametrize(
    "override",
    ["detector.slice_len=0", "detector.acc_threshold=-1", "mitigation.window_n=0", "schema_version=2", "integrator.method=rk4"],
)
def test_invalid_values(override: str) -> None:
    config = load_pipeline_config(overrides=[override], config_name="pipeline_unit_test")
    with pytest.raises(ConfigurationError):
        PipelineConfig.from_dictconfig(config)


def test_recorded_inputs_need_truth(pipeline_config: DictConfig, tmp_path: Path) -> None:
    imu = tmp_path / "imu.csv"
    imu.write_text("t,ax,ay,az\n0,0,0,9.81\n")
    config = copy.deepcopy(pipeline_config)
    config.inputs.imu_path = str(imu)
    with pytest.raises(ConfigurationError, match="truth_path"):
        PipelineConfig.from_dictconfig(config)
    config.inputs.imu_path = str(tmp_path / "missing.csv")
    with pytest.raises(ConfigurationError, match="does not exist"):
        PipelineConfig.from_dictconfig(config)


@pytest.mark.parametrize("suffix", [".yaml", ".json", ".toml"])
def test_config_file(tmp_path: Path, suffix: str) -> None:
    """A config file picks groups and values; command-line overrides win."""
    path = tmp_path / f"run{suffix}"
    if suffix == ".yaml":
        path.write_text("seed: 5\ntrajectory:\n  shape: line\n  pose_count: 1000\nglitch:\n  preset: n0_1\n")
    elif suffix == ".json":
        path.write_text(json.dumps({"seed": 5, "trajectory": {"shape": "line", "pose_count": 1000}, "glitch": {"preset": "n0_1"}}))
    else:
        path.write_text('seed = 5\n\n[trajectory]\nshape = "line"\npose_count = 1000\n\n[glitch]\npreset = "n0_1"\n')

    cfg = PipelineConfig.from_dictconfig(load_pipeline_config(path))
    assert cfg.seed == 5
    assert cfg.trajectory.shape is TrajectoryShape.LINE
    assert cfg.trajectory.speed == 4.0
    assert cfg.trajectory.pose_count == 1000
    assert cfg.glitch_preset == "n0_1"

    cfg = PipelineConfig.from_dictconfig(load_pipeline_config(path, ["seed=9", "glitch=n1_10"]))
    assert cfg.seed == 9
    assert (cfg.glitch.mu, cfg.glitch.sigma) == (1.0, 10.0)


@pytest.mark.parametrize(
    ("name", "content"),
    [("run.ini", "seed=1"), ("run.toml", "seed = "), ("run.json", "[1, 2]"), ("run.yaml", "detector:\n  bogus: 1\n")],
)
def test_bad_config_file(tmp_path: Path, name: str, content: str) -> None:
    path = tmp_path / name
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        load_pipeline_config(path)


def test_unknown_group_choice() -> None:
    with pytest.raises(ConfigurationError):
        load_pipeline_config(overrides=["glitch=n9_9"])


def test_failing_stage_is_named(pipeline_config: DictConfig, tmp_path: Path) -> None:
    """A stage failure names the stage and keeps the data error's exit code."""
    config = copy.deepcopy(pipeline_config)
    config.trajectory.imu_rate = 150.0
    cfg = replace(PipelineConfig.from_dictconfig(config), output_dir=tmp_path)
    with pytest.raises(StageError, match="simulate") as info:
        run_pipeline(cfg)
    assert info.value.exit_code == 3


def test_truth_must_cover_recorded_imu(pipeline_config: DictConfig, pipeline_run: PipelineResult, tmp_path: Path) -> None:
    """Anchoring against a truth shorter than the IMU recording is rejected before integrating."""
    run_dir = pipeline_run.run_dir
    lines = (run_dir / "truth.tum").read_text().splitlines(keepends=True)
    short = tmp_path / "short.tum"
    short.write_text("".join(lines[: len(lines) // 2]))
    config = copy.deepcopy(pipeline_config)
    OmegaConf.set_struct(config, False)
    config.inputs.imu_path = str(run_dir / "corrupted.csv")
    config.inputs.truth_path = str(short)
    config.variants = {"raw": {"detector": "none", "mitigation": "none"}}
    cfg = replace(PipelineConfig.from_dictconfig(config), output_dir=tmp_path / "out")
    assert cfg.anchor_period is not None

    with pytest.raises(StageError, match="truth covers") as info:
        run_pipeline(cfg)
    assert info.value.exit_code == 2
    assert isinstance(info.value.cause, ConfigurationError)
    assert not (tmp_path / "out" / "raw").exists()
