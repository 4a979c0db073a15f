"""Detector assembly: config -> segment model -> streaming run-length filter"""

import logging
import time
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import median_abs_deviation

from lib import standard_bayes
from lib.bocd_errors import BocdError, ConfigError, DetectionError
from lib.dsm_posterior import make_prior
from lib.exp_family import NaturalExpFamilyModel, build_model
from lib.run_length_filter import initial_state, map_segmentation, modal_changepoints, modal_run_lengths, step
from lib.segment_models import ConjugateSegmentModel, DsmSegmentModel, SegmentModel
from models.detector_config import DetectorConfig
from models.diffusion_spec import IDENTITY, DiffusionMatrixSpec
from models.run_length_state import HazardSpec, RunLengthState
from models.segmentation_result import SegmentationResult, TraceStep
from services.calibration import CalibrationResult, calibrate_omega

logger = logging.getLogger(__name__)

TRIM_CUTOFF = 3.0


class StreamingDetector:
    """Run-length filter fed one observation at a time"""

    def __init__(self, segment_model: SegmentModel, hazard: HazardSpec, prune_k: Optional[int] = 50):
        self.segment_model = segment_model
        self.hazard = hazard
        self.prune_k = prune_k
        self.state: RunLengthState = initial_state(segment_model)
        self.trace: List[TraceStep] = []
        self.per_step_nanos: List[int] = []

    @property
    def time(self) -> int:
        return self.state.time

    def push(self, x) -> TraceStep:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        started = time.perf_counter_ns()
        self.state, record = step(self.state, x, self.segment_model, self.hazard, self.prune_k)
        self.per_step_nanos.append(time.perf_counter_ns() - started)
        self.trace.append(record)
        return record

    def result(self, omega: Optional[float] = None, error: Optional[str] = None) -> SegmentationResult:
        return SegmentationResult(
            runlength_trace=list(self.trace),
            map_changepoints=map_segmentation(self.trace),
            modal_run_lengths=modal_run_lengths(self.trace),
            modal_changepoints=modal_changepoints(self.trace),
            per_step_nanos=list(self.per_step_nanos),
            log_evidence=self.state.log_evidence,
            omega=omega,
            error=error,
        )


def rescale(data: np.ndarray, mode: str) -> np.ndarray:
    """Column-wise rescaling applied before detection"""
    if mode == "none":
        return data
    if mode == "zscore":
        scale = data.std(axis=0)
        if np.any(scale == 0.0):
            raise ConfigError("data.rescale=zscore needs non-constant columns")
        return (data - data.mean(axis=0)) / scale
    if mode == "unit_mean":
        centre = data.mean(axis=0)
        if np.any(centre == 0.0):
            raise ConfigError("data.rescale=unit_mean needs columns with non-zero mean")
        return data / centre
    raise ConfigError(f"Unknown rescale mode '{mode}'")


def trim_outliers(data: np.ndarray, cutoff: float = TRIM_CUTOFF) -> np.ndarray:
    """Rows within `cutoff` robust standard deviations of the median in every column"""
    center = np.median(data, axis=0)
    scale = median_abs_deviation(data, axis=0, scale="normal")
    scale = np.where(scale > 0, scale, np.inf)
    keep = (np.abs(data - center) <= cutoff * scale).all(axis=1)
    if not keep.any():
        return data
    dropped = int(data.shape[0] - keep.sum())
    if dropped:
        logger.debug("Trimmed %d of %d rows before the anchor fit", dropped, data.shape[0])
    return data[keep]


def resolve_anchor(config: DetectorConfig, model: NaturalExpFamilyModel, data: np.ndarray) -> Optional[np.ndarray]:
    """theta* for the robust diffusion weights, from the configured policy"""
    if config.diffusion_kind == IDENTITY:
        return None
    kind, _, arg = config.anchor_policy.partition(":")
    if kind == "explicit":
        anchor = np.array([float(v) for v in arg.split(",")])
        if anchor.shape != (model.param_dim,):
            raise ConfigError(f"Explicit anchor needs {model.param_dim} values, got {anchor.shape[0]}")
        return anchor
    if kind == "full_data_mle":
        return model.mle(data)
    if kind == "trimmed_mle":
        return model.mle(trim_outliers(data))
    window = int(arg) if arg else config.calibration_window
    return model.mle(data[:window])


def build_reference(config: DetectorConfig, model: NaturalExpFamilyModel, prior, window: np.ndarray):
    if config.calibration_reference == "likelihood":
        return standard_bayes.LikelihoodReference(model, prior, window)
    baseline = standard_bayes.from_hyperparams(config.baseline_family, config.baseline_hyperparams)
    return standard_bayes.batch_update(baseline, window)


def build_segment_model(
    config: DetectorConfig, data: np.ndarray
) -> Tuple[SegmentModel, Optional[float], Optional[CalibrationResult]]:
    """Segment model for the configured method, calibrating omega if asked to"""
    if config.method == "standard":
        prior = standard_bayes.from_hyperparams(config.baseline_family, config.baseline_hyperparams)
        if prior.data_dim != data.shape[1]:
            raise ConfigError(f"Baseline is {prior.data_dim}-dimensional but the data has {data.shape[1]} columns")
        return ConjugateSegmentModel(prior), None, None

    try:
        model = build_model(config.model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if model.data_dim != data.shape[1]:
        raise ConfigError(f"Model '{model.name}' expects {model.data_dim} columns, data has {data.shape[1]}")
    prior = make_prior(model, config.prior_mean, config.prior_cov_diag)
    try:
        spec = DiffusionMatrixSpec(config.diffusion_kind, resolve_anchor(config, model, data))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    kind, value = config.omega_policy
    calibration = None
    if kind == "auto":
        window = data[: int(value)]
        calibration = calibrate_omega(
            model,
            spec,
            prior,
            build_reference(config, model, prior, window),
            window,
            bracket=config.calibration_bracket,
            tolerance=config.calibration_tolerance,
            samples=config.calibration_samples,
            seed=config.seed,
        )
        omega = calibration.omega
    else:
        omega = value
    segment_model = DsmSegmentModel(
        model,
        spec,
        prior,
        omega,
        predictive=config.predictive_mode,
        samples=config.mc_samples,
        seed=config.seed,
    )
    return segment_model, omega, calibration


def build_detector(config: DetectorConfig, data: np.ndarray) -> Tuple[StreamingDetector, Optional[float]]:
    segment_model, omega, _ = build_segment_model(config, data)
    return StreamingDetector(segment_model, HazardSpec(config.hazard), config.prune_k), omega


def prepare_data(config: DetectorConfig, data) -> np.ndarray:
    matrix = np.asarray(data, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise ConfigError(f"Data must be a T x d matrix, got shape {matrix.shape}")
    return rescale(matrix, config.data_rescale)


def run_detector(config: DetectorConfig, data) -> SegmentationResult:
    """Run the configured detector over a whole T x d matrix.

    Component failures surface as DetectionError carrying the result for
    the steps completed so far.
    """
    try:
        matrix = prepare_data(config, data)
        if matrix.shape[0] == 0:
            return SegmentationResult()
        detector, omega = build_detector(config, matrix)
    except ConfigError:
        raise
    except BocdError as exc:
        raise DetectionError(f"Detector setup failed: {exc}", SegmentationResult(error=str(exc))) from exc

    logger.info(
        "Running %s detector on %d x %d data (omega=%s, prune_k=%s)",
        config.method, matrix.shape[0], matrix.shape[1], omega, config.prune_k,
    )
    for x in matrix:
        try:
            detector.push(x)
        except BocdError as exc:
            logger.error("Detector failed at t=%d: %s", detector.time + 1, exc)
            partial_result = detector.result(omega, error=f"t={detector.time + 1}: {exc}")
            raise DetectionError(f"Detector failed at t={detector.time + 1}: {exc}", partial_result) from exc

    result = detector.result(omega)
    logger.info(
        "Detected %d MAP changepoints in %.1f ms: %s",
        len(result.map_changepoints), result.total_ms, result.map_changepoints,
    )
    return result
