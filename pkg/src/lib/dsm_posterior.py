"""Conjugate normal posterior for the diffusion score-matching loss"""

import logging
import os
from dataclasses import replace
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from lib.bocd_errors import PosteriorError
from lib.diffusion import loss_summary
from lib.exp_family import NaturalExpFamilyModel
from lib.truncated_normal import sample_truncated_normal
from models.diffusion_spec import DiffusionMatrixSpec
from models.posterior_params import GaussianPosteriorParams

logger = logging.getLogger(__name__)

# covariance is re-derived from precision every this many updates
REFRESH_INTERVAL = 1000
DEBUG_TOLERANCE = 1e-8


def _debug_enabled() -> bool:
    return os.getenv("ROBUST_BOCD_DEBUG", "").strip() not in ("", "0", "false")


def _spd_inverse(matrix: np.ndarray, what: str) -> np.ndarray:
    try:
        factor = cho_factor(matrix, lower=True)
    except LinAlgError as exc:
        raise PosteriorError(f"{what} is not symmetric positive definite") from exc
    inverse = cho_solve(factor, np.eye(matrix.shape[0]))
    return 0.5 * (inverse + inverse.T)


def make_prior(model: NaturalExpFamilyModel, mean, covariance) -> GaussianPosteriorParams:
    """Normal prior on the natural parameters, truncated to the model's domain.

    ``covariance`` may be a full matrix or the vector of its diagonal.
    """
    mean = np.asarray(mean, dtype=float).reshape(-1)
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim == 1:
        cov = np.diag(cov)
    if mean.shape != (model.param_dim,) or cov.shape != (model.param_dim, model.param_dim):
        raise PosteriorError(
            f"Prior dimensions {mean.shape}/{cov.shape} do not match {model.name} (p={model.param_dim})"
        )
    precision = _spd_inverse(cov, "Prior covariance")
    lower, upper = model.param_domain
    return GaussianPosteriorParams(
        precision=precision, covariance=cov.copy(), mean=mean, count=0, lower=lower, upper=upper
    )


def summarize(
    model: NaturalExpFamilyModel, spec: DiffusionMatrixSpec, data
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Sums of Lambda(x_t) and nu(x_t) over a batch"""
    p = model.param_dim
    lam_sum = np.zeros((p, p))
    nu_sum = np.zeros(p)
    count = 0
    for x in np.asarray(data, dtype=float).reshape(-1, model.data_dim):
        summary = loss_summary(spec, model, x)
        lam_sum += summary.lambda_matrix
        nu_sum += summary.nu
        count += 1
    return lam_sum, nu_sum, count


def posterior_from_sums(
    prior: GaussianPosteriorParams, omega: float, lam_sum: np.ndarray, nu_sum: np.ndarray, count: int
) -> GaussianPosteriorParams:
    if omega < 0.0:
        raise ValueError(f"Learning rate must be non-negative, got {omega}")
    if count == 0:
        return prior
    precision = prior.precision + 2.0 * omega * lam_sum
    precision = 0.5 * (precision + precision.T)
    covariance = _spd_inverse(precision, "Posterior precision")
    mean = covariance @ (prior.precision @ prior.mean - 2.0 * omega * nu_sum)
    return replace(prior, precision=precision, covariance=covariance, mean=mean, count=prior.count + count)


def batch_posterior(
    model: NaturalExpFamilyModel,
    spec: DiffusionMatrixSpec,
    prior: GaussianPosteriorParams,
    omega: float,
    data,
) -> GaussianPosteriorParams:
    """Posterior after absorbing all of ``data`` at once; empty data returns the prior"""
    lam_sum, nu_sum, count = summarize(model, spec, data)
    return posterior_from_sums(prior, omega, lam_sum, nu_sum, count)


def online_update(
    state: GaussianPosteriorParams,
    model: NaturalExpFamilyModel,
    spec: DiffusionMatrixSpec,
    omega: float,
    x,
) -> GaussianPosteriorParams:
    """Absorb one observation with a d x d Woodbury update of the covariance"""
    if omega < 0.0:
        raise ValueError(f"Learning rate must be non-negative, got {omega}")
    if omega == 0.0:
        return replace(state, count=state.count + 1)

    summary = loss_summary(spec, model, x)
    count = state.count + 1
    precision = state.precision + 2.0 * omega * summary.lambda_matrix
    precision = 0.5 * (precision + precision.T)

    covariance = None
    if count % REFRESH_INTERVAL != 0:
        covariance = _woodbury(state.covariance, np.sqrt(2.0 * omega) * summary.factor.T)
        if covariance is None:
            logger.warning("Woodbury update lost positive definiteness at count=%d; refactoring", count)
    if covariance is None:
        covariance = _spd_inverse(precision, "Posterior precision")

    mean = covariance @ (state.precision @ state.mean - 2.0 * omega * summary.nu)
    updated = replace(state, precision=precision, covariance=covariance, mean=mean, count=count)
    if _debug_enabled():
        _assert_inverse_pair(updated)
    return updated


def _woodbury(covariance: np.ndarray, u: np.ndarray):
    """(C^-1 + U U^T)^-1 = C - C U (I + U^T C U)^-1 U^T C, or None if not SPD"""
    cu = covariance @ u
    core = np.eye(u.shape[1]) + u.T @ cu
    try:
        factor = cho_factor(core, lower=True)
    except LinAlgError:
        return None
    updated = covariance - cu @ cho_solve(factor, cu.T)
    updated = 0.5 * (updated + updated.T)
    if np.any(np.diag(updated) <= 0.0):
        return None
    return updated


def _assert_inverse_pair(state: GaussianPosteriorParams) -> None:
    error = np.linalg.norm(state.precision @ state.covariance - np.eye(state.dim), ord="fro")
    if error > DEBUG_TOLERANCE:
        raise PosteriorError(f"precision * covariance deviates from identity by {error:.3e}")


def sample(state: GaussianPosteriorParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """n draws from the posterior truncated to the parameter domain"""
    if n < 1:
        raise ValueError(f"Sample size must be positive, got {n}")
    return sample_truncated_normal(
        state.mean, state.covariance, state.lower, state.upper, n, rng, precision=state.precision
    )
