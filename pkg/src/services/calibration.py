"""Learning-rate calibration: match the D_m posterior to a reference posterior"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from lib.bocd_errors import BocdError, CalibrationError
from lib.dsm_posterior import posterior_from_sums, summarize
from lib.exp_family import NaturalExpFamilyModel
from lib.standard_bayes import LikelihoodReference, log_density_unnorm_param
from models.diffusion_spec import DiffusionMatrixSpec
from models.posterior_params import GaussianPosteriorParams
from models.standard_posterior import NORMAL_KNOWN_VARIANCE, StandardBayesPosterior

logger = logging.getLogger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))
# optimum this close to a bracket end (in log omega) counts as on the boundary
BOUNDARY_SLACK = 5.0

Reference = Union[StandardBayesPosterior, LikelihoodReference]


@dataclass(frozen=True)
class CalibrationResult:
    omega: float
    objective: float
    at_boundary: bool
    evaluations: int


def gaussian_kl(mean_q, cov_q, mean_p, cov_p) -> float:
    """KL(N(mean_q, cov_q) || N(mean_p, cov_p))"""
    mean_q, mean_p = np.atleast_1d(mean_q), np.atleast_1d(mean_p)
    cov_q, cov_p = np.atleast_2d(cov_q), np.atleast_2d(cov_p)
    p = mean_q.shape[0]
    solve = np.linalg.solve(cov_p, cov_q)
    diff = mean_p - mean_q
    _, logdet_p = np.linalg.slogdet(cov_p)
    _, logdet_q = np.linalg.slogdet(cov_q)
    return 0.5 * float(np.trace(solve) + diff @ np.linalg.solve(cov_p, diff) - p + logdet_p - logdet_q)


class OmegaObjective:
    """K(omega) = KL(pi^{D_m}_omega || reference) up to the reference's constant.

    The loss summaries of the calibration window are summed once; the
    standard-normal draws are fixed so successive evaluations share
    their random numbers.
    """

    def __init__(
        self,
        model: NaturalExpFamilyModel,
        spec: DiffusionMatrixSpec,
        prior: GaussianPosteriorParams,
        reference: Reference,
        data,
        samples: int = 2048,
        seed: int = 0,
    ):
        self.prior = prior
        self.reference = reference
        self.lam_sum, self.nu_sum, self.count = summarize(model, spec, data)
        if self.count < 2:
            raise CalibrationError(f"Calibration needs at least 2 observations, got {self.count}")
        if isinstance(reference, StandardBayesPosterior):
            self._ref_log_density = partial(log_density_unnorm_param, reference)
        else:
            self._ref_log_density = reference.log_density_unnorm_param
        self.z = np.random.default_rng([seed, self.count]).standard_normal((samples, model.param_dim))
        self.evaluations = 0

    def posterior(self, omega: float) -> GaussianPosteriorParams:
        return posterior_from_sums(self.prior, omega, self.lam_sum, self.nu_sum, self.count)

    def reference_normal(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Mean and covariance of the reference over theta when it is Gaussian there"""
        ref = self.reference
        if isinstance(ref, StandardBayesPosterior) and ref.family == NORMAL_KNOWN_VARIANCE:
            m, s2, sigma2 = ref.hyperparams
            return np.array([m / sigma2]), np.array([[s2 / sigma2 ** 2]])
        return None

    def __call__(self, omega: float) -> float:
        self.evaluations += 1
        normal = self.reference_normal()
        post = self.posterior(omega)
        if normal is not None and not post.is_truncated:
            return gaussian_kl(post.mean, post.covariance, *normal)
        return self.monte_carlo(omega)

    def monte_carlo(self, omega: float) -> float:
        post = self.posterior(omega)
        chol = np.linalg.cholesky(post.covariance)
        thetas = post.mean + self.z @ chol.T
        half_logdet = float(np.sum(np.log(np.diag(chol))))
        p = post.dim
        if not post.is_truncated:
            entropy = 0.5 * p * (1.0 + _LOG_2PI) + half_logdet
            return -entropy - self._reference_mean(thetas)

        inside = np.all((thetas > post.lower) & (thetas < post.upper), axis=1)
        n_in = int(inside.sum())
        if n_in == 0:
            return float("inf")
        z_in = self.z[inside]
        # truncated normal density: untruncated density over the estimated in-domain mass
        log_q = -0.5 * np.sum(z_in * z_in, axis=1) - half_logdet - 0.5 * p * _LOG_2PI
        log_q = log_q - np.log(n_in / self.z.shape[0])
        return float(np.mean(log_q)) - self._reference_mean(thetas[inside])

    def _reference_mean(self, thetas: np.ndarray) -> float:
        try:
            values = self._ref_log_density(thetas)
        except BocdError as exc:
            raise CalibrationError(f"Reference density failed: {exc}") from exc
        if not np.all(np.isfinite(values)):
            raise CalibrationError("Reference density is not finite on posterior samples")
        return float(np.mean(values))


def calibrate_omega(
    model: NaturalExpFamilyModel,
    spec: DiffusionMatrixSpec,
    prior: GaussianPosteriorParams,
    reference: Reference,
    data,
    bracket: Tuple[float, float] = (1e-8, 1e2),
    tolerance: float = 1e-3,
    samples: int = 2048,
    seed: int = 0,
) -> CalibrationResult:
    """Minimise K(omega) over the bracket by a bounded scalar search in log omega"""
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo <= hi:
        raise CalibrationError(f"Calibration bracket must satisfy 0 < lo <= hi, got ({lo}, {hi})")
    objective = OmegaObjective(model, spec, prior, reference, data, samples=samples, seed=seed)

    log_lo, log_hi = np.log(lo), np.log(hi)
    if log_hi - log_lo <= tolerance:
        value = objective(lo)
        return CalibrationResult(omega=lo, objective=value, at_boundary=False, evaluations=objective.evaluations)

    def log_objective(log_omega: float) -> float:
        value = objective(float(np.exp(log_omega)))
        if np.isnan(value):
            raise CalibrationError(f"Objective is NaN at omega={np.exp(log_omega):.3e}")
        return value

    result = minimize_scalar(
        log_objective, bounds=(log_lo, log_hi), method="bounded", options={"xatol": tolerance}
    )
    omega = float(np.exp(result.x))
    at_boundary = min(result.x - log_lo, log_hi - result.x) <= BOUNDARY_SLACK * tolerance
    if at_boundary:
        logger.warning(
            "Calibrated omega=%.3e sits at the bracket edge [%.1e, %.1e]; widen calibration.bracket",
            omega, lo, hi,
        )
    logger.info("Calibrated omega=%.6g (K=%.6g, %d evaluations)", omega, result.fun, objective.evaluations)
    return CalibrationResult(
        omega=omega, objective=float(result.fun), at_boundary=bool(at_boundary), evaluations=objective.evaluations
    )
