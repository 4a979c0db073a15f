"""Conjugate Bayes posteriors for the standard baseline and as calibration references"""

import logging
from typing import Sequence

import numpy as np
from scipy.stats import invgamma, invwishart, multivariate_normal, multivariate_t, norm
from scipy.stats import t as student_t

from lib.bocd_errors import DomainError, PosteriorError
from lib.exp_family import NaturalExpFamilyModel
from models.posterior_params import GaussianPosteriorParams
from models.standard_posterior import (
    NORMAL_INVERSE_GAMMA,
    NORMAL_INVERSE_WISHART,
    NORMAL_KNOWN_VARIANCE,
    STANDARD_FAMILIES,
    StandardBayesPosterior,
)

logger = logging.getLogger(__name__)


def normal_known_variance(mean: float, mean_variance: float, noise_variance: float) -> StandardBayesPosterior:
    """Normal prior N(mean, mean_variance) on the mean of N(., noise_variance) data"""
    if not (mean_variance > 0.0 and noise_variance > 0.0):
        raise PosteriorError("normal_known_variance needs positive variances")
    return StandardBayesPosterior(
        NORMAL_KNOWN_VARIANCE, np.array([mean, mean_variance, noise_variance], dtype=float), data_dim=1
    )


def normal_inverse_gamma(mu0: float, nu: float, alpha: float, beta: float) -> StandardBayesPosterior:
    if not (nu > 0.0 and alpha > 0.0 and beta > 0.0):
        raise PosteriorError(f"NIG needs nu, alpha, beta > 0; got ({nu}, {alpha}, {beta})")
    return StandardBayesPosterior(NORMAL_INVERSE_GAMMA, np.array([mu0, nu, alpha, beta], dtype=float), data_dim=1)


def normal_inverse_wishart(mu0, kappa: float, dof: float, psi) -> StandardBayesPosterior:
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=float))
    d = mu0.shape[0]
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 1:
        psi = np.diag(psi)
    if psi.shape != (d, d):
        raise PosteriorError(f"NIW scale matrix must be {d}x{d}, got {psi.shape}")
    if not (kappa > 0.0 and dof > d - 1):
        raise PosteriorError(f"NIW needs kappa > 0 and dof > {d - 1}; got ({kappa}, {dof})")
    try:
        np.linalg.cholesky(psi)
    except np.linalg.LinAlgError as exc:
        raise PosteriorError("NIW scale matrix is not positive definite") from exc
    hyper = np.concatenate([mu0, [kappa, dof], psi.reshape(-1)])
    return StandardBayesPosterior(NORMAL_INVERSE_WISHART, hyper, data_dim=d)


def from_hyperparams(family: str, hyperparams: Sequence[float]) -> StandardBayesPosterior:
    """Build a prior from a config vector (NIW takes the diagonal of psi)"""
    values = [float(v) for v in hyperparams]
    if family == NORMAL_KNOWN_VARIANCE:
        if len(values) != 3:
            raise PosteriorError("normal_known_variance needs (m0, s0^2, sigma^2)")
        return normal_known_variance(*values)
    if family == NORMAL_INVERSE_GAMMA:
        if len(values) != 4:
            raise PosteriorError("normal_inverse_gamma needs (mu0, nu, alpha, beta)")
        return normal_inverse_gamma(*values)
    if family == NORMAL_INVERSE_WISHART:
        if len(values) < 4 or (len(values) - 2) % 2:
            raise PosteriorError("normal_inverse_wishart needs (mu0[d], kappa, dof, psi_diag[d])")
        d = (len(values) - 2) // 2
        return normal_inverse_wishart(values[:d], values[d], values[d + 1], values[d + 2:])
    raise PosteriorError(f"Unknown baseline family '{family}', expected one of {STANDARD_FAMILIES}")


def _niw_parts(post: StandardBayesPosterior):
    d = post.data_dim
    h = post.hyperparams
    return h[:d], h[d], h[d + 1], h[d + 2:].reshape(d, d)


def _check_x(post: StandardBayesPosterior, x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (post.data_dim,):
        raise DomainError(f"{post.family}: expected {post.data_dim}-dimensional x, got shape {arr.shape}")
    return arr


def update(post: StandardBayesPosterior, x) -> StandardBayesPosterior:
    """Exact conjugate update with one observation"""
    x = _check_x(post, x)
    if post.family == NORMAL_KNOWN_VARIANCE:
        m, s2, sigma2 = post.hyperparams
        precision = 1.0 / s2 + 1.0 / sigma2
        new = [(m / s2 + x[0] / sigma2) / precision, 1.0 / precision, sigma2]
    elif post.family == NORMAL_INVERSE_GAMMA:
        mu0, nu, alpha, beta = post.hyperparams
        new = [
            (nu * mu0 + x[0]) / (nu + 1.0),
            nu + 1.0,
            alpha + 0.5,
            beta + nu * (x[0] - mu0) ** 2 / (2.0 * (nu + 1.0)),
        ]
    else:
        mu0, kappa, dof, psi = _niw_parts(post)
        diff = x - mu0
        psi = psi + kappa / (kappa + 1.0) * np.outer(diff, diff)
        new = np.concatenate([(kappa * mu0 + x) / (kappa + 1.0), [kappa + 1.0, dof + 1.0], psi.reshape(-1)])
    return StandardBayesPosterior(post.family, np.asarray(new, dtype=float), post.data_dim, post.count + 1)


def batch_update(post: StandardBayesPosterior, data) -> StandardBayesPosterior:
    """Sufficient-statistic form of T sequential updates"""
    matrix = np.asarray(data, dtype=float).reshape(-1, post.data_dim)
    n = matrix.shape[0]
    if n == 0:
        return post
    xbar = matrix.mean(axis=0)
    centered = matrix - xbar
    if post.family == NORMAL_KNOWN_VARIANCE:
        m, s2, sigma2 = post.hyperparams
        precision = 1.0 / s2 + n / sigma2
        new = [(m / s2 + matrix[:, 0].sum() / sigma2) / precision, 1.0 / precision, sigma2]
    elif post.family == NORMAL_INVERSE_GAMMA:
        mu0, nu, alpha, beta = post.hyperparams
        scatter = float(centered[:, 0] @ centered[:, 0])
        new = [
            (nu * mu0 + n * xbar[0]) / (nu + n),
            nu + n,
            alpha + 0.5 * n,
            beta + 0.5 * scatter + nu * n * (xbar[0] - mu0) ** 2 / (2.0 * (nu + n)),
        ]
    else:
        mu0, kappa, dof, psi = _niw_parts(post)
        diff = xbar - mu0
        psi = psi + centered.T @ centered + kappa * n / (kappa + n) * np.outer(diff, diff)
        new = np.concatenate([(kappa * mu0 + n * xbar) / (kappa + n), [kappa + n, dof + n], psi.reshape(-1)])
    return StandardBayesPosterior(post.family, np.asarray(new, dtype=float), post.data_dim, post.count + n)


def log_predictive(post: StandardBayesPosterior, x) -> float:
    """Exact log posterior-predictive density: Gaussian or Student-t"""
    x = _check_x(post, x)
    if post.family == NORMAL_KNOWN_VARIANCE:
        m, s2, sigma2 = post.hyperparams
        return float(norm.logpdf(x[0], loc=m, scale=np.sqrt(s2 + sigma2)))
    if post.family == NORMAL_INVERSE_GAMMA:
        mu0, nu, alpha, beta = post.hyperparams
        scale = np.sqrt(beta * (nu + 1.0) / (alpha * nu))
        return float(student_t.logpdf(x[0], df=2.0 * alpha, loc=mu0, scale=scale))
    mu0, kappa, dof, psi = _niw_parts(post)
    df = dof - post.data_dim + 1.0
    shape = psi * (kappa + 1.0) / (kappa * df)
    return float(multivariate_t.logpdf(x, loc=mu0, shape=shape, df=df))


def log_density_unnorm_param(post: StandardBayesPosterior, theta) -> np.ndarray:
    """log pi^B at natural parameters theta, mapped to moment coordinates.

    The maps are the natural parameterisations of the matching models:
      normal_known_variance:  theta = mu / sigma^2                 (p = 1)
      normal_inverse_gamma:   theta = (mu / s^2, 1 / s^2)          (p = 2)
      normal_inverse_wishart: per coordinate (mu_i / s_i^2, 1 / s_i^2), evaluated
                              on the diagonal-covariance slice     (p = 2d)
    The log-Jacobian of each map is included. Accepts a single theta or a stack.
    """
    thetas = np.atleast_2d(np.asarray(theta, dtype=float))
    if post.family == NORMAL_KNOWN_VARIANCE:
        if thetas.shape[1] != 1:
            raise DomainError("normal_known_variance expects a 1-dimensional natural parameter")
        m, s2, sigma2 = post.hyperparams
        values = norm.logpdf(thetas[:, 0] * sigma2, loc=m, scale=np.sqrt(s2)) + np.log(sigma2)
    elif post.family == NORMAL_INVERSE_GAMMA:
        if thetas.shape[1] != 2:
            raise DomainError("normal_inverse_gamma expects natural parameters (mu/s^2, 1/s^2)")
        if np.any(thetas[:, 1] <= 0.0):
            raise DomainError("normal_inverse_gamma: precision coordinate must be positive")
        mu0, nu, alpha, beta = post.hyperparams
        variance = 1.0 / thetas[:, 1]
        mu = thetas[:, 0] * variance
        values = (
            invgamma.logpdf(variance, a=alpha, scale=beta)
            + norm.logpdf(mu, loc=mu0, scale=np.sqrt(variance / nu))
            - 3.0 * np.log(thetas[:, 1])
        )
    else:
        d = post.data_dim
        if thetas.shape[1] != 2 * d:
            raise DomainError(f"normal_inverse_wishart expects {2 * d} natural parameters")
        precisions = thetas[:, 1::2]
        if np.any(precisions <= 0.0):
            raise DomainError("normal_inverse_wishart: precision coordinates must be positive")
        mu0, kappa, dof, psi = _niw_parts(post)
        values = np.empty(thetas.shape[0])
        for s, row in enumerate(thetas):
            variances = 1.0 / row[1::2]
            sigma = np.diag(variances)
            mu = row[0::2] * variances
            values[s] = (
                invwishart.logpdf(sigma, df=dof, scale=psi)
                + multivariate_normal.logpdf(mu, mean=mu0, cov=sigma / kappa)
                - 3.0 * np.sum(np.log(row[1::2]))
            )
    return values if np.ndim(theta) > 1 else values[:1].reshape(())


class LikelihoodReference:
    """Exact posterior up to a constant: normal prior times the model likelihood.

    Serves as the calibration reference for models without a conjugate
    baseline (Gamma); evaluable anywhere inside the parameter domain.
    """

    def __init__(self, model: NaturalExpFamilyModel, prior: GaussianPosteriorParams, data):
        self.model = model
        self.prior = prior
        self.data = np.asarray(data, dtype=float).reshape(-1, model.data_dim)
        for x in self.data:
            model.check_support(x)

    def log_density_unnorm_param(self, theta) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(theta, dtype=float))
        lower, upper = self.model.param_domain
        if np.any(thetas <= lower) or np.any(thetas >= upper):
            raise DomainError(f"{self.model.name}: parameter outside its domain")
        values = multivariate_normal.logpdf(thetas, mean=self.prior.mean, cov=self.prior.covariance)
        values = np.atleast_1d(values).astype(float)
        for x in self.data:
            values = values + self.model.log_density(thetas, x)
        return values if np.ndim(theta) > 1 else values[:1].reshape(())
