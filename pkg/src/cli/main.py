"""Command-line entry point: detect, generate, calibrate, bench and monitor"""

import json
import logging
import sys
from pathlib import Path

import click

from lib.bocd_errors import BocdError, DetectionError
from services import csv_io
from services.benchmark import run_suite
from services.detector import build_segment_model, prepare_data, run_detector
from services.presets import load_preset_config, load_stream_spec
from services.stream_generator import generate as generate_stream

logger = logging.getLogger(__name__)


def _load(config: str, data: str, seed):
    overrides = {} if seed is None else {'seed': seed}
    detector_config = load_preset_config(config, overrides)
    matrix = csv_io.load_csv(
        data,
        header=detector_config.data_header,
        delimiter=detector_config.data_delimiter,
        columns=detector_config.data_columns,
    )
    return detector_config, matrix


def _fail(exc: BocdError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.option('--log-level', default='WARNING', envvar='ROBUST_BOCD_LOG_LEVEL', show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              help='Root log level')
def cli(log_level: str):
    """Robust Bayesian online changepoint detection"""
    logging.basicConfig(level=log_level.upper(), format='%(asctime)s %(levelname)s %(name)s: %(message)s')


@cli.command()
@click.option('--data', required=True, type=click.Path(dir_okay=False), help='CSV file with the series')
@click.option('--config', required=True, help='Config file or preset name')
@click.option('--out-dir', required=True, type=click.Path(file_okay=False), help='Directory for the artifacts')
@click.option('--seed', type=int, default=None, help='Override the config seed')
def detect(data: str, config: str, out_dir: str, seed):
    """Run the detector and write run-length, changepoint and timing artifacts"""
    try:
        detector_config, matrix = _load(config, data, seed)
        result = run_detector(detector_config, matrix)
    except DetectionError as exc:
        if exc.partial_result is not None:
            csv_io.write_artifacts(out_dir, exc.partial_result)
        _fail(exc)
    except BocdError as exc:
        _fail(exc)
    csv_io.write_artifacts(out_dir, result)
    click.echo(json.dumps(result.map_changepoints))


@cli.command()
@click.option('--spec', 'spec_name', required=True, help='Stream spec JSON file or preset name')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='CSV file to write')
@click.option('--seed', type=int, default=None, help='Override the spec seed')
def generate(spec_name: str, out: str, seed):
    """Draw a synthetic stream; ground-truth changepoints go next to the CSV"""
    try:
        spec = load_stream_spec(spec_name, seed)
        stream = generate_stream(spec)
    except BocdError as exc:
        _fail(exc)
    out_path = csv_io.write_matrix_csv(out, stream.data)
    truth_path = out_path.with_suffix('.changepoints.json')
    truth_path.write_text(json.dumps(stream.changepoints) + '\n', encoding='utf-8')
    click.echo(f"wrote {spec.length}x{spec.dim} stream to {out_path} (changepoints {stream.changepoints})")


@cli.command()
@click.option('--data', required=True, type=click.Path(dir_okay=False), help='CSV file with the series')
@click.option('--config', required=True, help='Config file or preset name')
@click.option('--seed', type=int, default=None, help='Override the config seed')
def calibrate(data: str, config: str, seed):
    """Print the calibrated learning rate omega*"""
    try:
        detector_config, matrix = _load(config, data, seed)
        if detector_config.method != 'dsm' or detector_config.omega_policy[0] != 'auto':
            raise click.UsageError("calibrate needs method = dsm and omega = auto:<t*>")
        _, omega, calibration = build_segment_model(detector_config, prepare_data(detector_config, matrix))
    except BocdError as exc:
        _fail(exc)
    suffix = ' (at bracket boundary)' if calibration.at_boundary else ''
    click.echo(f"{omega:.10g}{suffix}")


@cli.command()
@click.option('--suite', type=click.Choice(['complexity', 'dimension']), default='complexity', show_default=True)
@click.option('--pruned/--unpruned', default=True, help='Top-k pruning on or off')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='JSON report path (default stdout)')
@click.option('--seed', type=int, default=0)
def bench(suite: str, pruned: bool, out, seed: int):
    """Time detectors over growing T or d and report log-log slopes"""
    report = run_suite(suite, pruned=pruned, seed=seed)
    payload = json.dumps(report.to_dict(), indent=2)
    if out:
        Path(out).write_text(payload + '\n', encoding='utf-8')
    else:
        click.echo(payload)


@cli.command()
@click.option('--data', required=True, type=click.Path(dir_okay=False), help='CSV file with the series')
@click.option('--config', required=True, help='Config file or preset name')
@click.option('--interval', default=0.05, show_default=True, help='Seconds between steps')
def monitor(data: str, config: str, interval: float):
    """Step the detector through a series in a live terminal view"""
    from ui.detector_app import DetectorApp

    try:
        detector_config, matrix = _load(config, data, None)
        matrix = prepare_data(detector_config, matrix)
    except BocdError as exc:
        _fail(exc)
    app = DetectorApp(detector_config, matrix, interval=interval)
    app.run()


if __name__ == "__main__":
    cli()
