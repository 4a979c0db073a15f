"""Sampling from box-truncated multivariate normals"""

import logging
from typing import Optional

import numpy as np
from scipy.stats import norm, truncnorm

from lib.bocd_errors import TruncationMassError

logger = logging.getLogger(__name__)

MIN_ACCEPTANCE = 0.01
MIN_MASS = 1e-12
GIBBS_BURN_IN = 50
_MIN_BATCH = 256


def marginal_masses(mean: np.ndarray, covariance: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Probability each marginal assigns to its own interval"""
    sd = np.sqrt(np.diag(covariance))
    a = (lower - mean) / sd
    b = (upper - mean) / sd
    # take the difference in the tail that keeps precision
    return np.where(a > 0.0, norm.sf(a) - norm.sf(b), norm.cdf(b) - norm.cdf(a))


def check_truncation_mass(mean, covariance, lower, upper) -> None:
    masses = marginal_masses(mean, covariance, lower, upper)
    bad = np.flatnonzero(~(masses >= MIN_MASS))
    if bad.size:
        raise TruncationMassError(
            f"Truncation region has mass below {MIN_MASS:g} on coordinates {bad.tolist()}",
            coordinates=bad.tolist(),
        )


def _inside(samples: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.all((samples > lower) & (samples < upper), axis=1)


def sample_truncated_normal(
    mean: np.ndarray,
    covariance: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    n: int,
    rng: np.random.Generator,
    precision: Optional[np.ndarray] = None,
    chol: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Draw n samples from N(mean, covariance) restricted to the open box (lower, upper).

    Unbounded boxes use a plain Cholesky transform. Otherwise rejection
    sampling runs until n draws are accepted or the acceptance rate falls
    below 1%, after which independent Gibbs chains fill the remainder.
    """
    mean = np.asarray(mean, dtype=float)
    p = mean.shape[0]
    if chol is None:
        chol = np.linalg.cholesky(covariance)
    if not (np.any(np.isfinite(lower)) or np.any(np.isfinite(upper))):
        return mean + rng.standard_normal((n, p)) @ chol.T

    check_truncation_mass(mean, covariance, lower, upper)

    accepted = []
    have = drawn = 0
    cap = max(100 * n, 10 * _MIN_BATCH)
    rate = 1.0
    while have < n and drawn < cap:
        batch = int(min(cap - drawn, max(_MIN_BATCH, np.ceil(1.2 * (n - have) / max(rate, MIN_ACCEPTANCE)))))
        draws = mean + rng.standard_normal((batch, p)) @ chol.T
        ok = draws[_inside(draws, lower, upper)]
        accepted.append(ok)
        have += ok.shape[0]
        drawn += batch
        rate = have / drawn
        if rate < MIN_ACCEPTANCE:
            break

    samples = np.concatenate(accepted, axis=0)[:n] if accepted else np.empty((0, p))
    if samples.shape[0] < n:
        logger.info(
            "Rejection acceptance %.4f below %.2f; switching to Gibbs for %d draws",
            rate, MIN_ACCEPTANCE, n - samples.shape[0],
        )
        if precision is None:
            precision = np.linalg.inv(covariance)
        extra = gibbs_truncated_normal(mean, covariance, precision, lower, upper, n - samples.shape[0], rng)
        samples = np.concatenate([samples, extra], axis=0)
    return samples


def gibbs_truncated_normal(
    mean: np.ndarray,
    covariance: np.ndarray,
    precision: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    n: int,
    rng: np.random.Generator,
    burn_in: int = GIBBS_BURN_IN,
) -> np.ndarray:
    """Run n independent coordinate-wise Gibbs chains and keep their final states"""
    p = mean.shape[0]
    sd = np.sqrt(np.diag(covariance))
    start = mean.copy()
    for i in range(p):
        if start[i] <= lower[i] or start[i] >= upper[i]:
            width = upper[i] - lower[i]
            offset = min(sd[i], width / 2.0) if np.isfinite(width) else sd[i]
            start[i] = lower[i] + offset if start[i] <= lower[i] else upper[i] - offset
    state = np.tile(start, (n, 1))

    cond_sd = 1.0 / np.sqrt(np.diag(precision))
    for _ in range(burn_in):
        for i in range(p):
            # E[theta_i | rest] from the precision matrix
            others = np.delete(np.arange(p), i)
            shift = (state[:, others] - mean[others]) @ precision[i, others]
            loc = mean[i] - shift / precision[i, i]
            a = (lower[i] - loc) / cond_sd[i]
            b = (upper[i] - loc) / cond_sd[i]
            state[:, i] = truncnorm.rvs(a, b, loc=loc, scale=cond_sd[i], size=n, random_state=rng)
    return state
