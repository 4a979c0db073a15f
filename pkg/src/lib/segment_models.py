"""Per-segment predictive and update rules plugged into the run-length filter"""

from abc import ABC, abstractmethod
from typing import Any, Tuple

import numpy as np
from scipy.special import logsumexp

from lib import dsm_posterior, standard_bayes
from lib.bocd_errors import DomainError, UnsupportedPredictiveError
from lib.exp_family import NaturalExpFamilyModel
from models.diffusion_spec import DiffusionMatrixSpec
from models.posterior_params import GaussianPosteriorParams
from models.standard_posterior import StandardBayesPosterior

MONTE_CARLO = "monte_carlo"
CLOSED_FORM = "closed_form"
DEFAULT_MC_SAMPLES = 1000


def keyed_stream(seed: int, t: int, r: int) -> np.random.Generator:
    """RNG stream that depends only on (seed, t, r), never on evaluation order"""
    return np.random.default_rng([seed, t, r])


def log_pred_dm(
    post: GaussianPosteriorParams,
    model: NaturalExpFamilyModel,
    x,
    mode: str = MONTE_CARLO,
    rng: np.random.Generator = None,
    samples: int = DEFAULT_MC_SAMPLES,
) -> float:
    """log of E_{theta ~ post}[p_theta(x)], sampled or in closed form"""
    if mode == CLOSED_FORM:
        if not model.has_closed_form_predictive or post.is_truncated:
            raise UnsupportedPredictiveError(f"No closed-form predictive for model '{model.name}'")
        return model.closed_form_log_predictive(post.mean, post.covariance, x)
    if mode != MONTE_CARLO:
        raise UnsupportedPredictiveError(f"Unknown predictive mode '{mode}'")
    if rng is None:
        raise ValueError("Monte Carlo predictive needs an explicit RNG stream")

    thetas = dsm_posterior.sample(post, rng, samples)
    log_dens = model.log_density(thetas, x)
    if not np.all(np.isfinite(log_dens)):
        raise DomainError(f"{model.name}: non-finite density for sampled parameters at x={np.ravel(x).tolist()}")
    return float(logsumexp(log_dens) - np.log(samples))


class SegmentModel(ABC):
    """Prior, one-step predictive and update for the parameters of one segment"""

    @abstractmethod
    def prior(self) -> Any:
        ...

    @abstractmethod
    def log_predictive(self, posterior: Any, x: np.ndarray, key: Tuple[int, int]) -> float:
        """log p(x | segment so far); ``key`` = (t, run length) seeds any sampling"""

    @abstractmethod
    def update(self, posterior: Any, x: np.ndarray) -> Any:
        ...

    def is_prior(self, posterior: Any) -> bool:
        return posterior.count == 0


class DsmSegmentModel(SegmentModel):
    """Generalised posterior from diffusion score matching"""

    def __init__(
        self,
        model: NaturalExpFamilyModel,
        spec: DiffusionMatrixSpec,
        prior: GaussianPosteriorParams,
        omega: float,
        predictive: str = MONTE_CARLO,
        samples: int = DEFAULT_MC_SAMPLES,
        seed: int = 0,
    ):
        if predictive == CLOSED_FORM and not model.has_closed_form_predictive:
            raise UnsupportedPredictiveError(f"No closed-form predictive for model '{model.name}'")
        self.model = model
        self.spec = spec
        self._prior = prior
        self.omega = float(omega)
        self.predictive = predictive
        self.samples = int(samples)
        self.seed = int(seed)

    def prior(self) -> GaussianPosteriorParams:
        return self._prior

    def log_predictive(self, posterior, x, key):
        rng = keyed_stream(self.seed, *key) if self.predictive == MONTE_CARLO else None
        return log_pred_dm(posterior, self.model, x, self.predictive, rng, self.samples)

    def update(self, posterior, x):
        return dsm_posterior.online_update(posterior, self.model, self.spec, self.omega, x)


class ConjugateSegmentModel(SegmentModel):
    """Standard Bayes segment posterior with closed-form predictives"""

    def __init__(self, prior: StandardBayesPosterior):
        self._prior = prior

    def prior(self) -> StandardBayesPosterior:
        return self._prior

    def log_predictive(self, posterior, x, key):
        return standard_bayes.log_predictive(posterior, x)

    def update(self, posterior, x):
        return standard_bayes.update(posterior, x)
