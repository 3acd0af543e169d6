"""End-to-end runner: simulate, build templates, then detect, mitigate, integrate and
evaluate every variant over the same corrupted stream."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, TypeVar

import numpy as np
import tomli
import yaml
from hydra import compose, initialize
from hydra.errors import HydraException
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from imuguard.__init__ import console
from imuguard.constants import (
    PIPELINE_SCHEMA_VERSION,
    TIME_TOL,
    AlignmentMode,
    DetectorMode,
    IntegrationMethod,
    MitigationMode,
)
from imuguard.core.state import ImuBias, ImuStream, NavState, NoiseSpec, Trajectory, WorldModel
from imuguard.detect.config import DetectorConfig
from imuguard.detect.dtw_detector import detect_dtw
from imuguard.detect.report import DetectionReport
from imuguard.detect.scoring import score_detection
from imuguard.detect.slicing import slice_stream
from imuguard.detect.templates import LabeledRecording, TemplateLibrary, calibrate_dtw_threshold, extract_templates
from imuguard.detect.threshold import detect_threshold
from imuguard.evaluation.metrics import MetricReport, evaluate
from imuguard.exceptions import ConfigurationError, ImuGuardError, StageError
from imuguard.ins.integrator import IntegratorConfig, integrate
from imuguard.mitigate.config import MitigationConfig
from imuguard.mitigate.log import MitigationLog
from imuguard.mitigate.template import mitigate_dtw
from imuguard.mitigate.threshold import mitigate_threshold
from imuguard.sim.glitch import GlitchSpec, inject_glitches
from imuguard.sim.imu import synthesize_imu
from imuguard.sim.trajectory import GroundTruth, TrajectorySpec, generate_truth
from imuguard.utils.colorlogging import ColorLog
from imuguard.utils.io import (
    read_imu_csv,
    read_initial_state,
    read_tum,
    write_imu_csv,
    write_initial_state,
    write_json,
    write_mask,
    write_tum,
)
from imuguard.utils.parallel import resolve_parallelism

logger = ColorLog(console, __name__).logger

CONFIG_PATH = "configs"
CONFIG_NAME = "pipeline"
GROUP_KEYS = {"trajectory": "shape", "glitch": "preset"}

T = TypeVar("T")

# Detector each mitigation mode depends on
COMPATIBLE_DETECTOR = {
    MitigationMode.CLAMP: DetectorMode.THRESHOLD,
    MitigationMode.MOVING_AVERAGE: DetectorMode.THRESHOLD,
    MitigationMode.TEMPLATE_SUBSTITUTION: DetectorMode.DTW,
}


@dataclass(frozen=True)
class VariantSpec:
    name: str
    detector: DetectorMode
    mitigation: MitigationMode


@dataclass(frozen=True)
class InputPaths:
    imu_path: Path | None = None
    truth_path: Path | None = None
    templates_path: Path | None = None
    initial_state_path: Path | None = None


@dataclass(frozen=True)
class TemplateSettings:
    count: int = 50
    length: int = 40
    dims: int = 6
    gyro_weight: float = 100.0
    recording_seeds: tuple[int, ...] = (101, 102, 103)
    validation_seed: int = 201
    target_pass: float = 0.99
    margin: float = 1.2


@dataclass(frozen=True)
class PipelineConfig:
    """Validated run description composed from the Hydra config tree."""

    schema_version: int
    seed: int
    output_dir: Path
    trajectory: TrajectorySpec
    glitch: GlitchSpec
    glitch_preset: str
    noise: NoiseSpec
    bias: ImuBias
    templates: TemplateSettings
    slice_len: int
    acc_threshold: float
    dtw_threshold: float | None
    parallelism: int
    znormalize: bool
    window_n: int
    method: IntegrationMethod
    anchor_period: float | None
    use_bias: bool
    alignment: AlignmentMode
    lengths: tuple[float, ...]
    max_dt: float | None
    variants: tuple[VariantSpec, ...]
    inputs: InputPaths = field(default_factory=InputPaths)

    @classmethod
    def from_dictconfig(cls, cfg: DictConfig) -> PipelineConfig:
        """Build and validate from a composed configuration."""
        raw = OmegaConf.to_container(cfg, resolve=True)
        assert isinstance(raw, dict)
        try:
            version = int(raw.get("schema_version", -1))
            if version != PIPELINE_SCHEMA_VERSION:
                raise ConfigurationError(f"Unsupported schema_version {raw.get('schema_version')}, expected {PIPELINE_SCHEMA_VERSION}")
            seed = int(raw["seed"])
            glitch = dict(raw["glitch"])
            preset = str(glitch.pop("preset", "custom"))
            sensor = raw["sensor"]
            detector = raw["detector"]
            integrator = raw["integrator"]
            evaluation = raw["evaluation"]
            inputs = raw.get("inputs") or {}
            variants = tuple(
                VariantSpec(name=str(name), detector=DetectorMode(v["detector"]), mitigation=MitigationMode(v["mitigation"]))
                for name, v in raw["variants"].items()
            )
            config = cls(
                schema_version=version,
                seed=seed,
                output_dir=Path(raw["output_dir"]),
                trajectory=TrajectorySpec(**raw["trajectory"]),
                glitch=GlitchSpec(seed=seed + 1, **glitch),
                glitch_preset=preset,
                noise=NoiseSpec(acc_sigma=float(sensor["acc_sigma"]), gyro_sigma=float(sensor["gyro_sigma"]), seed=seed),
                bias=ImuBias(acc=np.asarray(sensor["acc_bias"], dtype=float), gyro=np.asarray(sensor["gyro_bias"], dtype=float)),
                templates=TemplateSettings(
                    **{**raw["templates"], "recording_seeds": tuple(int(s) for s in raw["templates"]["recording_seeds"])}
                ),
                slice_len=int(detector["slice_len"]),
                acc_threshold=float(detector["acc_threshold"]),
                dtw_threshold=None if detector.get("dtw_threshold") is None else float(detector["dtw_threshold"]),
                parallelism=int(detector["parallelism"]),
                znormalize=bool(detector.get("znormalize", False)),
                window_n=int(raw["mitigation"]["window_n"]),
                method=IntegrationMethod(integrator["method"]),
                anchor_period=None if integrator.get("anchor_period") is None else float(integrator["anchor_period"]),
                use_bias=bool(integrator.get("use_bias", False)),
                alignment=AlignmentMode(evaluation["alignment"]),
                lengths=tuple(float(L) for L in evaluation["lengths"]),
                max_dt=None if evaluation.get("max_dt") is None else float(evaluation["max_dt"]),
                variants=variants,
                inputs=InputPaths(**{k: Path(v) if v else None for k, v in inputs.items()}),
            )
        except ImuGuardError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid pipeline configuration: {e}") from e
        config.validate()
        return config

    def validate(self) -> None:
        if not self.variants:
            raise ConfigurationError("At least one pipeline variant is required")
        for v in self.variants:
            if v.mitigation is MitigationMode.NONE:
                continue
            needed = COMPATIBLE_DETECTOR[v.mitigation]
            if v.detector is not needed:
                raise ConfigurationError(
                    f"Variant '{v.name}': {v.mitigation.value} mitigation requires {needed.value} detection, got {v.detector.value}"
                )
        if self.slice_len <= 0:
            raise ConfigurationError(f"detector.slice_len must be positive, got {self.slice_len}")
        if self.acc_threshold <= 0:
            raise ConfigurationError(f"detector.acc_threshold must be > 0, got {self.acc_threshold}")
        if self.dtw_threshold is not None and self.dtw_threshold <= 0:
            raise ConfigurationError(f"detector.dtw_threshold must be > 0, got {self.dtw_threshold}")
        if self.window_n < 1:
            raise ConfigurationError(f"mitigation.window_n must be >= 1, got {self.window_n}")
        if self.anchor_period is not None and self.anchor_period <= 0:
            raise ConfigurationError(f"integrator.anchor_period must be > 0, got {self.anchor_period}")
        for name, path in vars(self.inputs).items():
            if path is not None and not path.exists():
                raise ConfigurationError(f"inputs.{name} '{path}' does not exist")
        if self.inputs.imu_path is not None:
            if self.inputs.truth_path is None:
                raise ConfigurationError("inputs.truth_path is required with inputs.imu_path")
            if self.uses_dtw and (self.inputs.templates_path is None or self.dtw_threshold is None):
                raise ConfigurationError("Recorded inputs with DTW variants need inputs.templates_path and detector.dtw_threshold")

    @property
    def uses_dtw(self) -> bool:
        return any(v.detector is DetectorMode.DTW for v in self.variants)


@dataclass
class VariantOutcome:
    name: str
    metrics: MetricReport
    report: DetectionReport | None
    log: MitigationLog | None
    detection_score: dict[str, Any] | None = None


@dataclass
class PipelineResult:
    run_dir: Path
    summary: dict[str, Any]
    variants: dict[str, VariantOutcome]


def _read_config_file(path: Path) -> dict[str, Any]:
    suffix = path.suffix.lower()
    text = path.read_text(encoding="utf-8")
    try:
        if suffix == ".toml":
            data = tomli.loads(text)
        elif suffix == ".json":
            data = json.loads(text)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            raise ConfigurationError(f"Config file '{path}' must be .toml, .json, .yaml or .yml")
    except (tomli.TOMLDecodeError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Cannot parse config file '{path}': {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file '{path}' must hold a mapping at the top level")
    return data


def load_pipeline_config(
    config_file: Path | None = None,
    overrides: list[str] | None = None,
    config_name: str = CONFIG_NAME,
) -> DictConfig:
    """Compose the packaged defaults, a user config file and command-line overrides.

    A `trajectory.shape` or `glitch.preset` in the file selects the matching config
    group before the file's own values are merged on top.
    """
    overrides = list(overrides or [])
    user: dict[str, Any] = {}
    if config_file is not None:
        user = _read_config_file(config_file)
        chosen = {o.split("=", 1)[0] for o in overrides if "=" in o}
        group_choices = []
        for group, key in GROUP_KEYS.items():
            section = user.get(group)
            choice = section.pop(key, None) if isinstance(section, dict) else None
            if choice and group not in chosen:
                group_choices.append(f"{group}={choice}")
        overrides = group_choices + overrides
    logger.info(f"Composing config '{config_name}' with overrides {overrides}")
    try:
        with initialize(config_path=CONFIG_PATH, version_base=None):
            cfg = compose(config_name=config_name, overrides=overrides)
        if user:
            cfg = OmegaConf.merge(cfg, OmegaConf.create(user))
            # Command-line overrides win over the file
            dotlist = [o.lstrip("+") for o in overrides if "=" in o and o.split("=", 1)[0] not in GROUP_KEYS]
            cfg = OmegaConf.merge(cfg, OmegaConf.from_dotlist(dotlist))
    except (HydraException, OmegaConfBaseException) as e:
        raise ConfigurationError(f"Cannot compose pipeline config: {e}") from e
    assert isinstance(cfg, DictConfig)
    return cfg


def _stage(name: str, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except StageError:
        raise
    except Exception as e:
        logger.error(f"Stage '{name}' failed: {e}")
        raise StageError(name, e) from e


@dataclass
class PipelineInputs:
    truth: Trajectory
    initial: NavState
    clean: ImuStream | None
    corrupted: ImuStream
    mask: np.ndarray | None
    ground_truth: GroundTruth | None = None


def check_truth_covers(truth: Trajectory, stream: ImuStream) -> None:
    """Anchoring looks up truth poses at IMU timestamps, so the truth must span the stream."""
    if len(truth) == 0 or stream.t[0] < truth.t[0] - TIME_TOL or stream.t[-1] > truth.t[-1] + TIME_TOL:
        span = "empty" if len(truth) == 0 else f"[{truth.t[0]:.6f}, {truth.t[-1]:.6f}] s"
        raise ConfigurationError(
            f"IMU samples span [{stream.t[0]:.6f}, {stream.t[-1]:.6f}] s but the truth covers {span}; "
            "trim inputs.imu_path or disable integrator.anchor_period"
        )


def prepare_inputs(cfg: PipelineConfig, run_dir: Path) -> PipelineInputs:
    if cfg.inputs.imu_path is not None and cfg.inputs.truth_path is not None:
        corrupted = read_imu_csv(cfg.inputs.imu_path)
        truth = read_tum(cfg.inputs.truth_path)
        if cfg.anchor_period is not None:
            check_truth_covers(truth, corrupted)
        if cfg.inputs.initial_state_path is not None:
            initial = read_initial_state(cfg.inputs.initial_state_path)
        else:
            p, q = truth.pose_at(max(truth.t[0], corrupted.t[0]))
            initial = NavState(t=max(truth.t[0], corrupted.t[0]), p=p, v=np.zeros(3), q=q)
            logger.warning("No initial state given; starting from the first truth pose at rest")
        return PipelineInputs(truth=truth, initial=initial, clean=None, corrupted=corrupted, mask=None)

    ground_truth = generate_truth(cfg.trajectory)
    clean = synthesize_imu(ground_truth, bias=cfg.bias, noise=cfg.noise)
    corrupted, mask = inject_glitches(clean, cfg.glitch)
    write_tum(ground_truth.trajectory, run_dir / "truth.tum")
    write_imu_csv(clean, run_dir / "clean.csv")
    write_imu_csv(corrupted, run_dir / "corrupted.csv")
    write_mask(mask, run_dir / "mask.json")
    initial = ground_truth.initial_state()
    write_initial_state(initial, run_dir / "initial_state.json")
    logger.info(f"Simulated {len(clean)} samples on {cfg.trajectory.shape.value}, {int(mask.sum())} corrupted ({cfg.glitch_preset})")
    return PipelineInputs(
        truth=ground_truth.trajectory,
        initial=initial,
        clean=clean,
        corrupted=corrupted,
        mask=mask,
        ground_truth=ground_truth,
    )


def _clean_run(cfg: PipelineConfig, ground_truth: GroundTruth, seed: int) -> ImuStream:
    noise = NoiseSpec(acc_sigma=cfg.noise.acc_sigma, gyro_sigma=cfg.noise.gyro_sigma, seed=seed)
    return synthesize_imu(ground_truth, bias=cfg.bias, noise=noise)


def _templates(cfg: PipelineConfig, inputs: PipelineInputs, run_dir: Path) -> tuple[TemplateLibrary, float]:
    ts = cfg.templates
    if cfg.inputs.templates_path is not None:
        library = TemplateLibrary.load(cfg.inputs.templates_path)
    else:
        assert inputs.ground_truth is not None
        recordings = [
            LabeledRecording(
                label=cfg.trajectory.shape.value,
                stream=_clean_run(cfg, inputs.ground_truth, s),
                source=f"{cfg.trajectory.shape.value}-seed{s}",
            )
            for s in ts.recording_seeds
        ]
        library = extract_templates(recordings, N=ts.length, k=ts.count, dims=ts.dims, gyro_weight=ts.gyro_weight)
    library.save(run_dir / "templates.json")

    if cfg.dtw_threshold is not None:
        return library, cfg.dtw_threshold
    assert inputs.ground_truth is not None
    validation = slice_stream(
        _clean_run(cfg, inputs.ground_truth, ts.validation_seed),
        cfg.slice_len,
        dims=library.dims,
        gyro_weight=library.gyro_weight,
    )
    threshold = calibrate_dtw_threshold(
        library,
        validation.series(),
        target_pass=ts.target_pass,
        margin=ts.margin,
        parallelism=cfg.parallelism,
        znormalize=cfg.znormalize,
    )
    return library, threshold


def _run_variant(
    variant: VariantSpec,
    cfg: PipelineConfig,
    inputs: PipelineInputs,
    library: TemplateLibrary | None,
    dtw_threshold: float | None,
    run_dir: Path,
) -> VariantOutcome:
    out_dir = run_dir / variant.name
    out_dir.mkdir(parents=True, exist_ok=True)
    stream = inputs.corrupted
    prefix = f"{variant.name}:"

    report: DetectionReport | None = None
    if variant.detector is DetectorMode.THRESHOLD:
        det = DetectorConfig(mode=DetectorMode.THRESHOLD, acc_threshold=cfg.acc_threshold)
        report = _stage(prefix + "detect", lambda: detect_threshold(stream, det))
    elif variant.detector is DetectorMode.DTW:
        det = DetectorConfig(
            mode=DetectorMode.DTW,
            dtw_threshold=dtw_threshold,
            library=library,
            slice_len=cfg.slice_len,
            parallelism=cfg.parallelism,
            znormalize=cfg.znormalize,
        )
        slices = slice_stream(stream, cfg.slice_len, dims=library.dims, gyro_weight=library.gyro_weight)
        report = _stage(prefix + "detect", lambda: detect_dtw(slices, det))
    if report is not None:
        report.save(out_dir / "report.jsonl")

    log: MitigationLog | None = None
    cleaned = stream
    if variant.mitigation is not MitigationMode.NONE:
        assert report is not None
        mit = MitigationConfig(mode=variant.mitigation, window_n=cfg.window_n)
        if variant.mitigation is MitigationMode.TEMPLATE_SUBSTITUTION:
            result = _stage(prefix + "mitigate", lambda: mitigate_dtw(slices, report, library, mit))
        else:
            result = _stage(prefix + "mitigate", lambda: mitigate_threshold(stream, report, mit))
        cleaned, log = result.stream, result.log
        log.save(out_dir / "mitigation_log.json")
    write_imu_csv(cleaned, out_dir / "cleaned.csv")

    integ = IntegratorConfig(
        method=cfg.method,
        bias=cfg.bias if cfg.use_bias else ImuBias(),
        world=WorldModel(),
        anchor_period=cfg.anchor_period,
        anchor_source=inputs.truth if cfg.anchor_period is not None else None,
    )
    estimate = _stage(prefix + "integrate", lambda: integrate(inputs.initial, cleaned, integ))
    write_tum(estimate, out_dir / "trajectory.tum")

    metrics = _stage(
        prefix + "evaluate",
        lambda: evaluate(estimate, inputs.truth, alignment=cfg.alignment, lengths=cfg.lengths, max_dt=cfg.max_dt),
    )
    write_json(metrics.to_dict(), out_dir / "metrics.json")
    metrics.write_csv(out_dir / "relative_errors.csv")

    score = None
    if report is not None and inputs.mask is not None:
        score = score_detection(report, inputs.mask).to_dict()
    logger.info(f"Variant '{variant.name}': ATE RMSE {metrics.ate_rmse:.4f} m")
    return VariantOutcome(name=variant.name, metrics=metrics, report=report, log=log, detection_score=score)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run every configured variant over the same input and write a comparison summary.

    Artifacts land in `cfg.output_dir`; each variant gets its own subdirectory. A
    failing stage raises StageError naming it, and files written so far are kept.
    """
    run_dir = cfg.output_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    inputs = _stage("simulate", lambda: prepare_inputs(cfg, run_dir))

    library: TemplateLibrary | None = None
    dtw_threshold: float | None = None
    if cfg.uses_dtw:
        library, dtw_threshold = _stage("templates", lambda: _templates(cfg, inputs, run_dir))

    workers = resolve_parallelism(len(cfg.variants))
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="variant") as pool:
        futures = {v.name: pool.submit(_run_variant, v, cfg, inputs, library, dtw_threshold, run_dir) for v in cfg.variants}
        outcomes = {name: f.result() for name, f in futures.items()}

    summary: dict[str, Any] = {
        "schema_version": cfg.schema_version,
        "seed": cfg.seed,
        "preset": cfg.glitch_preset,
        "trajectory": cfg.trajectory.shape.value,
        "dtw_threshold": dtw_threshold,
        "templates": None if library is None else len(library),
        "variants": {
            name: {
                **o.metrics.to_dict(),
                "detector": next(v.detector.value for v in cfg.variants if v.name == name),
                "mitigation": next(v.mitigation.value for v in cfg.variants if v.name == name),
                "abnormal_records": None if o.report is None else o.report.abnormal_count,
                "changed_samples": None if o.log is None else o.log.changed_samples,
            }
            for name, o in outcomes.items()
        },
        "detection": {name: o.detection_score for name, o in outcomes.items() if o.detection_score is not None},
    }
    write_json(summary, run_dir / "summary.json")
    ates = ", ".join(f"{name}={o.metrics.ate_rmse:.4f}" for name, o in outcomes.items())
    logger.info(f"Pipeline finished in '{run_dir}': ATE RMSE {ates}")
    return PipelineResult(run_dir=run_dir, summary=summary, variants=outcomes)
