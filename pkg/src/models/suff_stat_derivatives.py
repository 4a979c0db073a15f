"""Derivative blocks of a sufficient statistic at one observation"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SuffStatDerivatives:
    """First and diagonal second derivatives of r(x), plus the gradient of b(x)"""

    # d x p, entry (i, j) = dr_j / dx_i
    jacobian: np.ndarray
    # d x p, entry (i, j) = d^2 r_j / dx_i^2
    second_diag: np.ndarray
    # d
    base_grad: np.ndarray
