import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Iterator, List, Optional

import numba
import numpy as np
import polars as pl
import scipy
import typer
from omegaconf import OmegaConf
from rich.table import Table
from typing_extensions import Annotated

from imuguard import __version__
from imuguard.__init__ import console
from imuguard.constants import (
    DEFAULT_RELATIVE_LENGTHS,
    DEFAULT_SLICE_LEN,
    DEFAULT_TEMPLATE_COUNT,
    DEFAULT_TEMPLATE_LEN,
    AlignmentMode,
    DetectorMode,
    IntegrationMethod,
    MitigationMode,
    TrajectoryShape,
)
from imuguard.core.state import ImuBias, NavState
from imuguard.detect.config import DetectorConfig
from imuguard.detect.dtw_detector import detect_dtw
from imuguard.detect.report import DetectionReport
from imuguard.detect.slicing import slice_stream
from imuguard.detect.templates import LabeledRecording, TemplateLibrary, calibrate_dtw_threshold, extract_templates
from imuguard.detect.threshold import detect_threshold
from imuguard.dtw.benchmark import bench_dtw
from imuguard.evaluation.metrics import evaluate as evaluate_trajectories
from imuguard.exceptions import ConfigurationError, ImuGuardError
from imuguard.ins.integrator import IntegratorConfig, integrate as integrate_stream
from imuguard.mitigate.config import MitigationConfig
from imuguard.mitigate.template import mitigate_dtw
from imuguard.mitigate.threshold import mitigate_threshold
from imuguard.pipeline import PipelineConfig, load_pipeline_config, prepare_inputs, run_pipeline
from imuguard.sim.glitch import GLITCH_PRESETS
from imuguard.utils.colorlogging import ColorLog
from imuguard.utils.io import read_imu_csv, read_initial_state, read_tum, write_imu_csv, write_json, write_tum

logger = ColorLog(console, __name__).logger

imuguard_cli = typer.Typer(rich_markup_mode="rich", pretty_exceptions_enable=False)


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Log errors and exit with 2 (validation), 3 (data) or 4 (internal)."""
    try:
        yield
    except ImuGuardError as e:
        logger.error(str(e))
        raise typer.Exit(code=e.exit_code) from e
    except typer.Exit:
        raise
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        raise typer.Exit(code=ImuGuardError.exit_code) from e


def parse_floats(text: str, name: str) -> list[float]:
    """Parse a comma separated list of numbers such as `7,14,21`."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigurationError(f"{name} must be comma separated numbers, got '{text}'") from e


@imuguard_cli.callback(invoke_without_command=True)
def main(ctx: typer.Context) -> None:
    """Detect and mitigate IMU glitches with threshold rules or DTW template matching.

    Every stage reads and writes plain files (IMU CSV, TUM trajectories, JSON and
    JSON lines) so it can be rerun on its own; `pipeline` chains them all.
    """
    # If you just run `imuguard` on the command line, show the help
    if ctx.invoked_subcommand is None:
        typer.echo(ctx.get_help())


@imuguard_cli.command()
def simulate(
    output_dir: Annotated[
        Path,
        typer.Option("--output-dir", "-o", help="Directory for truth.tum, clean.csv, corrupted.csv and mask.json."),
    ] = Path("./runs/simulate"),
    preset: Annotated[
        str,
        typer.Option("--preset", help=f"Glitch preset, one of {', '.join(sorted(GLITCH_PRESETS))}."),
    ] = "n50_10",
    seed: Annotated[int, typer.Option("--seed", help="Seed of the sensor noise; glitches use seed + 1.")] = 0,
    poses: Annotated[int, typer.Option("--poses", help="Number of ground-truth poses.")] = 2000,
    shape: Annotated[TrajectoryShape, typer.Option("--shape", help="Ground-truth trajectory shape.")] = TrajectoryShape.ELLIPSE3D,
    overrides: Optional[List[str]] = typer.Argument(None, hidden=True),
) -> None:
    """Simulate a ground-truth trajectory, its clean IMU stream and a glitch-corrupted copy."""
    with exit_on_error():
        config = load_pipeline_config(
            overrides=[
                f"trajectory={shape.value}",
                f"glitch={preset}",
                f"seed={seed}",
                f"trajectory.pose_count={poses}",
                *(overrides or []),
            ]
        )
        cfg = replace(PipelineConfig.from_dictconfig(config), output_dir=output_dir)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        inputs = prepare_inputs(cfg, cfg.output_dir)
        logger.info(f"Wrote {len(inputs.corrupted)} samples to '{cfg.output_dir}'")


@imuguard_cli.command("extract-templates")
def extract_templates_command(
    recordings: Annotated[List[Path], typer.Argument(help="Clean IMU CSV recordings.", exists=True, dir_okay=False)],
    output_path: Annotated[Path, typer.Option("--output", "-o", help="Template library JSON file.")] = Path("templates.json"),
    labels: Annotated[
        Optional[List[str]],
        typer.Option("--label", "-l", help="Motion label per recording (repeat the flag); defaults to the file stem."),
    ] = None,
    count: Annotated[int, typer.Option("--count", "-k", help="Number of templates.")] = DEFAULT_TEMPLATE_COUNT,
    length: Annotated[int, typer.Option("--length", "-n", help="Template length in samples.")] = DEFAULT_TEMPLATE_LEN,
    dims: Annotated[Optional[int], typer.Option("--dims", help="3 (accelerometer) or 6 (with gyroscope).")] = None,
    gyro_weight: Annotated[float, typer.Option("--gyro-weight", help="Scale of gyroscope channels.")] = 1.0,
    validation: Annotated[
        Optional[Path],
        typer.Option("--validation", help="Clean IMU CSV used to calibrate the DTW threshold.", exists=True, dir_okay=False),
    ] = None,
    slice_len: Annotated[int, typer.Option("--slice-len", help="Slice length of the validation slices.")] = DEFAULT_SLICE_LEN,
    target_pass: Annotated[float, typer.Option("--target-pass", help="Fraction of clean slices classified normal.")] = 0.99,
) -> None:
    """Select representative windows from clean recordings as DTW templates."""
    with exit_on_error():
        if labels and len(labels) != len(recordings):
            raise ConfigurationError(f"Got {len(labels)} labels for {len(recordings)} recordings")
        names = labels or [p.stem for p in recordings]
        recs = [LabeledRecording(label=name, stream=read_imu_csv(p), source=p.name) for name, p in zip(names, recordings)]
        library = extract_templates(recs, N=length, k=count, dims=dims, gyro_weight=gyro_weight)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        library.save(output_path)
        logger.info(f"Wrote {len(library)} templates to '{output_path}'")
        if validation is not None:
            slices = slice_stream(read_imu_csv(validation), slice_len, dims=library.dims, gyro_weight=library.gyro_weight)
            threshold = calibrate_dtw_threshold(library, slices.series(), target_pass=target_pass)
            console.print(f"dtw_threshold = {threshold:.6g}")


@imuguard_cli.command()
def detect(
    imu_path: Annotated[Path, typer.Argument(help="IMU CSV file.", exists=True, dir_okay=False)],
    output_path: Annotated[Path, typer.Option("--output", "-o", help="Detection report (JSON lines).")] = Path("report.jsonl"),
    mode: Annotated[DetectorMode, typer.Option("--mode", help="Detector: threshold or dtw.")] = DetectorMode.DTW,
    templates: Annotated[
        Optional[Path],
        typer.Option("--templates", "-t", help="Template library JSON (dtw mode).", exists=True, dir_okay=False),
    ] = None,
    acc_threshold: Annotated[Optional[float], typer.Option("--acc-threshold", help="Per-axis limit in m/s^2.")] = None,
    dtw_threshold: Annotated[Optional[float], typer.Option("--dtw-threshold", help="Largest normal DTW distance.")] = None,
    slice_len: Annotated[int, typer.Option("--slice-len", help="Samples per slice (dtw mode).")] = DEFAULT_SLICE_LEN,
    parallelism: Annotated[int, typer.Option("--parallelism", "-j", help="Worker threads.")] = 1,
    znormalize: Annotated[bool, typer.Option("--znormalize/--raw", help="Standardise channels before matching.")] = False,
) -> None:
    """Classify an IMU stream and write one report record per slice (dtw) or flagged run (threshold)."""
    with exit_on_error():
        stream = read_imu_csv(imu_path)
        if mode is DetectorMode.THRESHOLD:
            cfg = DetectorConfig(mode=mode, acc_threshold=acc_threshold)
            report = detect_threshold(stream, cfg)
        else:
            if templates is None:
                raise ConfigurationError("DTW detection needs --templates")
            library = TemplateLibrary.load(templates)
            cfg = DetectorConfig(
                mode=mode,
                dtw_threshold=dtw_threshold,
                library=library,
                slice_len=slice_len,
                parallelism=parallelism,
                znormalize=znormalize,
            )
            report = detect_dtw(slice_stream(stream, slice_len, dims=library.dims, gyro_weight=library.gyro_weight), cfg)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        report.save(output_path)
        logger.info(f"{report.abnormal_count} abnormal record(s) written to '{output_path}'")


@imuguard_cli.command()
def mitigate(
    imu_path: Annotated[Path, typer.Argument(help="IMU CSV file the report was computed on.", exists=True, dir_okay=False)],
    report_path: Annotated[Path, typer.Option("--report", "-r", help="Detection report (JSON lines).", exists=True, dir_okay=False)],
    output_path: Annotated[Path, typer.Option("--output", "-o", help="Cleaned IMU CSV.")] = Path("cleaned.csv"),
    log_path: Annotated[Path, typer.Option("--log", help="Mitigation log JSON.")] = Path("mitigation_log.json"),
    mode: Annotated[
        Optional[MitigationMode],
        typer.Option("--mode", help="clamp or moving_average for threshold reports; dtw reports use template_substitution."),
    ] = None,
    templates: Annotated[
        Optional[Path],
        typer.Option("--templates", "-t", help="Template library JSON (dtw reports).", exists=True, dir_okay=False),
    ] = None,
    window_n: Annotated[int, typer.Option("--window", help="Preceding clean samples averaged (moving_average).")] = 5,
) -> None:
    """Replace the samples a detection report flags."""
    with exit_on_error():
        stream = read_imu_csv(imu_path)
        report = DetectionReport.load(report_path, stream_length=len(stream))
        if report.mode is DetectorMode.DTW:
            if templates is None:
                raise ConfigurationError("Mitigating a dtw report needs --templates")
            library = TemplateLibrary.load(templates)
            cfg = MitigationConfig(mode=mode or MitigationMode.TEMPLATE_SUBSTITUTION, window_n=window_n)
            slices = slice_stream(stream, report.slice_len or DEFAULT_SLICE_LEN, dims=library.dims, gyro_weight=library.gyro_weight)
            result = mitigate_dtw(slices, report, library, cfg)
        else:
            cfg = MitigationConfig(mode=mode or MitigationMode.CLAMP, window_n=window_n)
            result = mitigate_threshold(stream, report, cfg)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        write_imu_csv(result.stream, output_path)
        result.log.save(log_path)
        logger.info(f"Changed {result.log.changed_samples} sample(s); cleaned stream in '{output_path}'")


@imuguard_cli.command()
def integrate(
    imu_path: Annotated[Path, typer.Argument(help="IMU CSV file.", exists=True, dir_okay=False)],
    output_path: Annotated[Path, typer.Option("--output", "-o", help="Estimated trajectory (TUM).")] = Path("trajectory.tum"),
    initial_state: Annotated[
        Optional[Path],
        typer.Option("--initial-state", help="Initial state JSON; at rest at the first sample when omitted.", exists=True),
    ] = None,
    method: Annotated[IntegrationMethod, typer.Option("--method", help="euler or midpoint.")] = IntegrationMethod.MIDPOINT,
    anchor: Annotated[
        Optional[Path],
        typer.Option("--anchor", help="Reference trajectory (TUM) the pose is reset to.", exists=True, dir_okay=False),
    ] = None,
    anchor_period: Annotated[Optional[float], typer.Option("--anchor-period", help="Seconds between pose resets.")] = None,
    bias: Annotated[
        Optional[str],
        typer.Option("--bias", help="Known bias as 'bax,bay,baz' or 'bax,bay,baz,bgx,bgy,bgz'."),
    ] = None,
) -> None:
    """Dead-reckon an IMU stream into a trajectory, optionally anchored to a reference."""
    with exit_on_error():
        stream = read_imu_csv(imu_path)
        start = read_initial_state(initial_state) if initial_state is not None else NavState.at_rest(float(stream.t[0]))
        known_bias = ImuBias()
        if bias is not None:
            values = parse_floats(bias, "--bias")
            if len(values) not in (3, 6):
                raise ConfigurationError(f"--bias takes 3 or 6 values, got {len(values)}")
            known_bias = ImuBias(acc=np.array(values[:3]), gyro=np.array(values[3:] or [0.0, 0.0, 0.0]))
        if anchor is not None and anchor_period is None:
            anchor_period = 1.0
        cfg = IntegratorConfig(
            method=method,
            bias=known_bias,
            anchor_period=anchor_period,
            anchor_source=None if anchor is None else read_tum(anchor),
        )
        trajectory = integrate_stream(start, stream, cfg)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        write_tum(trajectory, output_path)
        logger.info(f"Wrote {len(trajectory)} poses to '{output_path}'")


@imuguard_cli.command()
def evaluate(
    estimate: Annotated[Path, typer.Argument(help="Estimated trajectory (TUM).", exists=True, dir_okay=False)],
    reference: Annotated[Path, typer.Argument(help="Reference trajectory (TUM).", exists=True, dir_okay=False)],
    output_path: Annotated[Path, typer.Option("--output", "-o", help="Metric report JSON.")] = Path("metrics.json"),
    csv_path: Annotated[
        Optional[Path], typer.Option("--csv", help="Per-length relative errors CSV.")
    ] = None,
    align: Annotated[AlignmentMode, typer.Option("--align", help="se3, sim3, posyaw or none.")] = AlignmentMode.SE3,
    lengths: Annotated[
        str, typer.Option("--lengths", help="Sub-trajectory lengths in metres.")
    ] = ",".join(f"{L:g}" for L in DEFAULT_RELATIVE_LENGTHS),
    max_dt: Annotated[Optional[float], typer.Option("--max-dt", help="Association tolerance in seconds.")] = None,
) -> None:
    """Compute ATE and relative errors of an estimate against a reference."""
    with exit_on_error():
        report = evaluate_trajectories(
            read_tum(estimate),
            read_tum(reference),
            alignment=align,
            lengths=parse_floats(lengths, "--lengths"),
            max_dt=max_dt,
        )
        output_path.parent.mkdir(parents=True, exist_ok=True)
        write_json(report.to_dict(), output_path)
        if csv_path is not None:
            report.write_csv(csv_path)
        console.print(f"ATE RMSE: {report.ate_rmse:.6f} m ({report.pairs} pairs, {align.value} alignment)")


@imuguard_cli.command()
def pipeline(
    config_file: Annotated[
        Optional[Path],
        typer.Option("--config-file", "-c", help="YAML, JSON or TOML run description.", exists=True, dir_okay=False),
    ] = None,
    output_dir: Annotated[Optional[Path], typer.Option("--output-dir", "-o", help="Run directory.")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Run seed.")] = None,
    overrides: Optional[List[str]] = typer.Argument(None, hidden=True),
) -> None:
    """Run raw, threshold-mitigated and DTW-mitigated variants and compare them.

    Extra `key=value` arguments override the configuration, e.g. `glitch=n0_1
    detector.slice_len=20`.
    """
    with exit_on_error():
        extra = list(overrides or [])
        if seed is not None:
            extra.append(f"seed={seed}")
        config = load_pipeline_config(config_file, extra)
        logger.info(f"Pipeline config:\n{OmegaConf.to_yaml(config)}")
        cfg = PipelineConfig.from_dictconfig(config)
        if output_dir is not None:
            cfg = replace(cfg, output_dir=output_dir)
        result = run_pipeline(cfg)

        table = Table("Variant", "Detector", "Mitigation", "ATE RMSE [m]")
        for name, variant in result.summary["variants"].items():
            table.add_row(name, variant["detector"], variant["mitigation"], f"{variant['ate_rmse']:.4f}")
        console.print(table)


@imuguard_cli.command("bench-dtw")
def bench_dtw_command(
    count: Annotated[int, typer.Option("--count", "-k", help="Number of templates.")] = 10,
    template_len: Annotated[int, typer.Option("--template-len", help="Template length N.")] = 40,
    slice_len: Annotated[int, typer.Option("--slice-len", help="Slice length M.")] = 40,
    dims: Annotated[int, typer.Option("--dims", help="Channels per sample.")] = 3,
    levels: Annotated[str, typer.Option("--levels", help="Parallelism levels to time.")] = "1,2,4,8",
    repeats: Annotated[int, typer.Option("--repeats", help="Timed evaluations per level.")] = 200,
    seed: Annotated[int, typer.Option("--seed", help="Seed of the random series.")] = 0,
) -> None:
    """Time one best-match evaluation per parallelism level."""
    with exit_on_error():
        parsed = [int(v) for v in parse_floats(levels, "--levels")]
        rows = bench_dtw(k=count, template_len=template_len, slice_len=slice_len, dims=dims, levels=parsed, repeats=repeats, seed=seed)
        table = Table("Parallelism", "Median [ms]", "Min [ms]", "Speed-up", "Best template")
        for row in rows:
            table.add_row(
                str(row.parallelism),
                f"{row.median_ms:.4f}",
                f"{row.min_ms:.4f}",
                f"{row.speedup:.2f}x",
                f"{row.result.template_id} ({row.result.distance:.4g})",
            )
        console.print(table)


@imuguard_cli.command()
def version() -> None:
    """Display version information for imuguard and its dependencies."""
    table = Table("Package", "Version")
    table.add_row("imuguard", __version__)
    table.add_row("Python", sys.version.split()[0])
    table.add_row("NumPy", np.__version__)
    table.add_row("SciPy", scipy.__version__)
    table.add_row("Numba", numba.__version__)
    table.add_row("Polars", pl.__version__)
    console.print(table)


def imuguard_entrypoint() -> None:
    """Main entry point for the imuguard CLI application."""
    imuguard_cli()


if __name__ == "__main__":
    imuguard_cli()
