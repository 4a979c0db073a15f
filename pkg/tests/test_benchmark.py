"""Tests for the timing harness"""

import numpy as np
import pytest

from services.benchmark import (
    bench_complexity,
    bench_data,
    diagonal_configs,
    known_variance_configs,
    loglog_slope,
    run_suite,
)
from services.detector import run_detector


def test_empty_grid():
    report = bench_complexity({}, lengths=(100,))
    assert report.rows == []
    assert report.slopes_length == {}


def test_loglog_slope():
    x = np.array([10.0, 100.0, 1000.0])
    assert loglog_slope(x, 3.0 * x ** 2) == pytest.approx(2.0)


def test_bench_data():
    data = bench_data(200, 3, seed=1)
    assert data.shape == (200, 3)
    assert data[100:].mean() - data[:100].mean() == pytest.approx(3.0, abs=0.5)
    np.testing.assert_array_equal(data, bench_data(200, 3, seed=1))


def test_small_grid():
    report = bench_complexity(known_variance_configs(20), lengths=(30, 60))
    assert len(report.rows) == 4
    assert set(report.slopes_length) == {"dsm/d=1", "standard/d=1"}
    assert all(row.seconds > 0 for row in report.rows)
    assert report.to_dict()["rows"][0]["config"] == "dsm"


def test_diagonal_configs_build_for_each_dimension():
    configs = diagonal_configs(10, samples=20)
    data = bench_data(20, 2)
    for factory in configs.values():
        assert run_detector(factory(2), data).length == 20


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("latency")


def _median_step(config, length):
    nanos = run_detector(config, bench_data(length, 1)).per_step_nanos
    return float(np.median(nanos[-100:]))


@pytest.mark.slow
def test_pruned_cost_grows_linearly():
    report = run_suite("complexity", pruned=True)
    for name in ("dsm", "standard"):
        assert 0.8 <= report.slopes_length[f"{name}/d=1"] <= 1.2
    config = known_variance_configs(50)["dsm"](1)
    assert _median_step(config, 10000) <= 2.0 * _median_step(config, 100)


@pytest.mark.slow
def test_unpruned_cost_grows_quadratically():
    report = run_suite("complexity", pruned=False)
    assert 1.6 <= report.slopes_length["dsm/d=1"] <= 2.4
