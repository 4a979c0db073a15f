"""Synthetic piecewise-stationary streams with known changepoints"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from lib.bocd_errors import StreamSpecError
from models.stream_spec import DISTRIBUTIONS, ComponentSpec, StreamSpec

logger = logging.getLogger(__name__)


@dataclass
class GeneratedStream:
    data: np.ndarray
    changepoints: List[int]
    contaminated: np.ndarray


def validate(spec: StreamSpec) -> None:
    if spec.length < 1 or spec.dim < 1:
        raise StreamSpecError(f"Stream needs length >= 1 and dim >= 1, got {spec.length} x {spec.dim}")
    if not spec.segments or spec.segments[0].start != 1:
        raise StreamSpecError("The first segment must start at t=1")
    starts = [s.start for s in spec.segments]
    if any(b <= a for a, b in zip(starts, starts[1:])):
        raise StreamSpecError(f"Segment starts must be strictly increasing, got {starts}")
    if starts[-1] > spec.length:
        raise StreamSpecError(f"Segment start {starts[-1]} lies beyond the stream length {spec.length}")
    for segment in spec.segments:
        if len(segment.components) != spec.dim:
            raise StreamSpecError(
                f"Segment at t={segment.start} has {len(segment.components)} components, expected {spec.dim}"
            )
        for component in segment.components:
            _validate_component(component, segment.start)

    cont = spec.contamination
    if not 0.0 <= cont.rate < 1.0:
        raise StreamSpecError(f"Contamination rate must lie in [0, 1), got {cont.rate}")
    if cont.scale < 0.0:
        raise StreamSpecError("Contamination scale must be non-negative")
    if cont.rate > 0.0:
        if cont.value is None or len(cont.value) != spec.dim:
            raise StreamSpecError(f"Contamination value must have {spec.dim} coordinates")
        for segment in spec.segments:
            for j, component in enumerate(segment.components):
                if component.positive_support and (cont.value[j] <= 0.0 or cont.scale > 0.0):
                    raise StreamSpecError(
                        f"Contamination would leave the positive support of coordinate {j} in the segment at "
                        f"t={segment.start}"
                    )


def _validate_component(component: ComponentSpec, start: int) -> None:
    names = DISTRIBUTIONS.get(component.distribution)
    if names is None:
        raise StreamSpecError(f"Unknown distribution '{component.distribution}' in segment at t={start}")
    if len(component.params) != len(names):
        raise StreamSpecError(f"{component.distribution} takes parameters {names}, got {component.params}")
    positive = component.params[1:] if component.distribution == "gaussian" else component.params
    if any(v <= 0.0 for v in positive):
        raise StreamSpecError(f"{component.distribution} parameters {component.params} must be positive")


def _draw(component: ComponentSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    if component.distribution == "gaussian":
        mean, sd = component.params
        return rng.normal(mean, sd, size=n)
    if component.distribution == "exponential":
        (rate,) = component.params
        return rng.exponential(1.0 / rate, size=n)
    shape, rate = component.params
    return rng.gamma(shape, 1.0 / rate, size=n)


def generate(spec: StreamSpec) -> GeneratedStream:
    """Draw the stream; identical specs (seed included) give identical data"""
    validate(spec)
    rng = np.random.default_rng(spec.seed)
    data = np.empty((spec.length, spec.dim))
    bounds = [s.start - 1 for s in spec.segments] + [spec.length]
    for segment, begin, end in zip(spec.segments, bounds, bounds[1:]):
        for j, component in enumerate(segment.components):
            data[begin:end, j] = _draw(component, rng, end - begin)

    cont = spec.contamination
    mask = np.zeros(spec.length, dtype=bool)
    if cont.rate > 0.0:
        mask = rng.random(spec.length) < cont.rate
        outliers = np.tile(np.asarray(cont.value, dtype=float), (int(mask.sum()), 1))
        if cont.scale > 0.0:
            outliers = outliers + cont.scale * rng.standard_normal(outliers.shape)
        data[mask] = outliers
    logger.debug("Generated %d x %d stream, %d contaminated points", spec.length, spec.dim, int(mask.sum()))
    return GeneratedStream(data=data, changepoints=list(spec.changepoints), contaminated=mask)
