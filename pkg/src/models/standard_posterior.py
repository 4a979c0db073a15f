"""Conjugate posterior value type for the standard Bayes baseline"""

from dataclasses import dataclass

import numpy as np

NORMAL_KNOWN_VARIANCE = "normal_known_variance"
NORMAL_INVERSE_GAMMA = "normal_inverse_gamma"
NORMAL_INVERSE_WISHART = "normal_inverse_wishart"
STANDARD_FAMILIES = (NORMAL_KNOWN_VARIANCE, NORMAL_INVERSE_GAMMA, NORMAL_INVERSE_WISHART)


@dataclass(frozen=True)
class StandardBayesPosterior:
    """Family name plus a flat hyperparameter vector.

    Layouts:
      normal_known_variance:   (m, s2, sigma2)       mean ~ N(m, s2), x ~ N(mean, sigma2)
      normal_inverse_gamma:    (mu0, nu, alpha, beta)
      normal_inverse_wishart:  (mu0[d], kappa, dof, vec(psi)[d*d])
    """

    family: str
    hyperparams: np.ndarray
    data_dim: int = 1
    count: int = 0
