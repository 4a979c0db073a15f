"""Wall-time benchmarks of detector configurations over length and dimension grids"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Mapping, Sequence

import numpy as np

from models.detector_config import DetectorConfig, build_config
from services.detector import run_detector

logger = logging.getLogger(__name__)

ConfigFactory = Callable[[int], DetectorConfig]

COMPLEXITY_LENGTHS = (100, 1000, 10000)
UNPRUNED_LENGTHS = (50, 100, 200, 400)
DIMENSION_LENGTH = 1000
DIMENSIONS = (1, 2, 4, 8)


@dataclass
class BenchRow:
    config: str
    length: int
    dim: int
    seconds: float
    changepoints: int


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)
    # least-squares slope of log seconds against log T, per config and d
    slopes_length: Dict[str, float] = field(default_factory=dict)
    # same against log d, per config and T
    slopes_dim: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def bench_data(length: int, dim: int, seed: int = 0) -> np.ndarray:
    """Unit-variance Gaussian stream with a mean shift of 3 halfway through"""
    rng = np.random.default_rng([seed, length, dim])
    data = rng.standard_normal((length, dim))
    data[length // 2:] += 3.0
    return data


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def bench_complexity(
    configs: Mapping[str, ConfigFactory],
    lengths: Sequence[int],
    dims: Sequence[int] = (1,),
    seed: int = 0,
) -> BenchReport:
    """Time every config on every (T, d); configurations run one after another"""
    report = BenchReport()
    for name, factory in configs.items():
        for dim in dims:
            config = factory(dim)
            for length in lengths:
                data = bench_data(length, dim, seed)
                started = time.perf_counter()
                result = run_detector(config, data)
                seconds = time.perf_counter() - started
                row = BenchRow(name, int(length), int(dim), seconds, len(result.map_changepoints))
                report.rows.append(row)
                logger.info("bench %s T=%d d=%d: %.3fs", name, length, dim, seconds)

    for name in configs:
        for dim in dims:
            rows = [r for r in report.rows if r.config == name and r.dim == dim]
            if len({r.length for r in rows}) > 1:
                report.slopes_length[f"{name}/d={dim}"] = loglog_slope(
                    [r.length for r in rows], [r.seconds for r in rows]
                )
        for length in lengths:
            rows = [r for r in report.rows if r.config == name and r.length == length]
            if len({r.dim for r in rows}) > 1:
                report.slopes_dim[f"{name}/T={length}"] = loglog_slope(
                    [r.dim for r in rows], [r.seconds for r in rows]
                )
    return report


def known_variance_configs(prune_k) -> Dict[str, ConfigFactory]:
    """Univariate D_m and standard detectors sharing a fixed noise variance"""
    return {
        "dsm": lambda dim: build_config({
            "model": "gaussian_known_variance:1",
            "prior.mean": [0.0],
            "prior.cov_diag": [10.0],
            "diffusion.kind": "robust",
            "diffusion.anchor_policy": "explicit:1",
            "omega": "fixed:0.5",
            "predictive": "closed_form",
            "prune_k": prune_k,
        }),
        "standard": lambda dim: build_config({
            "model": "gaussian_known_variance:1",
            "method": "standard",
            "baseline.family": "normal_known_variance",
            "baseline.hyperparams": [0.0, 10.0, 1.0],
            "prune_k": prune_k,
        }),
    }


def diagonal_configs(prune_k, samples: int = 200) -> Dict[str, ConfigFactory]:
    """Diagonal-Gaussian D_m and normal-inverse-Wishart detectors for any d"""
    return {
        "dsm": lambda dim: build_config({
            "model": f"diag_gaussian:{dim}",
            "prior.mean": [0.0, 1.0] * dim,
            "prior.cov_diag": [10.0, 1.0] * dim,
            "diffusion.kind": "robust",
            "diffusion.anchor_policy": "explicit:" + ",".join(["0,1"] * dim),
            "omega": "fixed:0.25",
            "predictive": f"monte_carlo:{samples}",
            "prune_k": prune_k,
        }),
        "standard": lambda dim: build_config({
            "model": f"diag_gaussian:{dim}",
            "method": "standard",
            "baseline.family": "normal_inverse_wishart",
            "baseline.hyperparams": [0.0] * dim + [1.0, dim + 2.0] + [1.0] * dim,
            "prune_k": prune_k,
        }),
    }


def run_suite(suite: str, pruned: bool = True, seed: int = 0) -> BenchReport:
    """Named suites: 'complexity' (time vs T) and 'dimension' (time vs d)"""
    prune_k = 50 if pruned else None
    if suite == "complexity":
        lengths = COMPLEXITY_LENGTHS if pruned else UNPRUNED_LENGTHS
        return bench_complexity(known_variance_configs(prune_k), lengths, (1,), seed)
    if suite == "dimension":
        return bench_complexity(diagonal_configs(prune_k), (DIMENSION_LENGTH,), DIMENSIONS, seed)
    raise ValueError(f"Unknown benchmark suite '{suite}', expected 'complexity' or 'dimension'")
