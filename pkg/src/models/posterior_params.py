"""Gaussian (possibly truncated) posterior over natural parameters"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianPosteriorParams:
    """Co-maintained precision/covariance of a truncated normal posterior.

    Covariance is the source of truth for sampling, precision for updates.
    ``lower``/``upper`` are the open box bounds inherited from the model's
    parameter domain (+-inf for unbounded coordinates).
    """

    precision: np.ndarray
    covariance: np.ndarray
    mean: np.ndarray
    count: int
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def is_truncated(self) -> bool:
        return bool(np.any(np.isfinite(self.lower)) or np.any(np.isfinite(self.upper)))
