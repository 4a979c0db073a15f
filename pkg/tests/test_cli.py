"""Tests for the click command-line interface"""

import hashlib
import json

from click.testing import CliRunner

from cli import main
from services.benchmark import BenchReport, BenchRow

FAST_CONFIG = """\
model = gaussian_known_variance:1
prior.mean = 0
prior.cov_diag = 10
diffusion.kind = robust
diffusion.anchor_policy = explicit:1
omega = auto:30
calibration.reference = baseline
calibration.samples = 256
baseline.family = normal_known_variance
baseline.hyperparams = 0, 10, 1
predictive = closed_form
"""


def _setup(tmp_path, runner):
    config = tmp_path / "fast.conf"
    config.write_text(FAST_CONFIG)
    data = tmp_path / "stream.csv"
    spec = tmp_path / "shift.stream.json"
    spec.write_text(json.dumps({
        "length": 120,
        "dim": 1,
        "segments": [
            {"start": 1, "components": [{"distribution": "gaussian", "params": [0.0, 1.0]}]},
            {"start": 61, "components": [{"distribution": "gaussian", "params": [6.0, 1.0]}]},
        ],
    }))
    result = runner.invoke(main.cli, ["generate", "--spec", str(spec), "--out", str(data), "--seed", "4"])
    assert result.exit_code == 0, result.output
    return config, data


def test_generate_writes_truth(tmp_path):
    runner = CliRunner()
    _, data = _setup(tmp_path, runner)
    assert data.read_text().splitlines()[0] == "x1"
    assert json.loads((tmp_path / "stream.changepoints.json").read_text()) == [61]


def test_detect_writes_artifacts(tmp_path):
    runner = CliRunner()
    config, data = _setup(tmp_path, runner)
    out = tmp_path / "out"
    result = runner.invoke(main.cli, ["detect", "--data", str(data), "--config", str(config), "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    found = json.loads(result.output.strip().splitlines()[-1])
    assert len(found) == 1 and abs(found[0] - 61) <= 2
    for name in ("runlength.csv", "changepoints.json", "summary.json", "timing.json"):
        assert (out / name).is_file()
    assert json.loads((out / "summary.json").read_text())["omega"] > 0


def test_detect_is_reproducible(tmp_path):
    runner = CliRunner()
    config, data = _setup(tmp_path, runner)
    digests = []
    for run in ("a", "b"):
        out = tmp_path / run
        runner.invoke(main.cli, ["detect", "--data", str(data), "--config", str(config), "--out-dir", str(out)])
        digests.append([hashlib.sha256((out / n).read_bytes()).hexdigest()
                        for n in ("runlength.csv", "changepoints.json", "summary.json")])
    assert digests[0] == digests[1]


def test_calibrate_prints_omega(tmp_path):
    runner = CliRunner()
    config, data = _setup(tmp_path, runner)
    result = runner.invoke(main.cli, ["calibrate", "--data", str(data), "--config", str(config)])
    assert result.exit_code == 0, result.output
    assert float(result.output.split()[0]) > 0


def test_calibrate_needs_auto_omega(tmp_path):
    runner = CliRunner()
    _, data = _setup(tmp_path, runner)
    result = runner.invoke(main.cli, ["calibrate", "--data", str(data), "--config", "synthetic"])
    assert result.exit_code == 2


def test_bad_csv_fails_cleanly(tmp_path):
    runner = CliRunner()
    config, _ = _setup(tmp_path, runner)
    bad = tmp_path / "bad.csv"
    bad.write_text("x\n1\n2\nnope\n")
    result = runner.invoke(main.cli, ["detect", "--data", str(bad), "--config", str(config),
                                      "--out-dir", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "row 3" in result.output


def test_unknown_preset(tmp_path):
    runner = CliRunner()
    _, data = _setup(tmp_path, runner)
    result = runner.invoke(main.cli, ["detect", "--data", str(data), "--config", "nope",
                                      "--out-dir", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "error:" in result.output


def test_bench_report(tmp_path, monkeypatch):
    calls = {}

    def fake_suite(suite, pruned=True, seed=0):
        calls.update(suite=suite, pruned=pruned, seed=seed)
        return BenchReport(rows=[BenchRow("dsm", 100, 1, 0.01, 1)], slopes_length={"dsm/d=1": 1.0})

    monkeypatch.setattr(main, "run_suite", fake_suite)
    out = tmp_path / "bench.json"
    result = CliRunner().invoke(main.cli, ["bench", "--unpruned", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert calls == {"suite": "complexity", "pruned": False, "seed": 0}
    assert json.loads(out.read_text())["slopes_length"] == {"dsm/d=1": 1.0}
