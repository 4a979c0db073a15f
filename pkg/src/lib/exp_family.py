"""Natural exponential family models p(x) = exp(theta^T r(x) - a(theta) + b(x))"""

import logging
from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from lib.bocd_errors import DegenerateDataError, DomainError, UnsupportedPredictiveError
from models.suff_stat_derivatives import SuffStatDerivatives

logger = logging.getLogger(__name__)

ALL_REALS = "all_reals"
POSITIVE_ORTHANT = "positive_orthant"
PRODUCT_OF_SUPPORTS = "product_of_supports"

# per-coordinate support tags
REAL = "real"
POSITIVE = "positive"

_LOG_2PI = float(np.log(2.0 * np.pi))


class NaturalExpFamilyModel(ABC):
    """Pluggable natural-form exponential family described through r, b and a.

    Subclasses implement the unchecked ``_suff_stat``/``_derivatives``/
    ``_base_measure`` hooks; the public methods validate support first.
    ``log_partition`` is vectorised over a leading sample axis of theta.
    """

    name: str = ""
    data_dim: int = 1
    param_dim: int = 1

    @property
    @abstractmethod
    def param_domain(self) -> Tuple[np.ndarray, np.ndarray]:
        """Open box (lower, upper) of admissible natural parameters"""

    @property
    @abstractmethod
    def coordinate_supports(self) -> Tuple[str, ...]:
        """Support tag (real / positive) of every data coordinate"""

    @property
    def data_support(self) -> str:
        tags = set(self.coordinate_supports)
        if tags == {REAL}:
            return ALL_REALS
        if tags == {POSITIVE}:
            return POSITIVE_ORTHANT
        return PRODUCT_OF_SUPPORTS

    @abstractmethod
    def _suff_stat(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _derivatives(self, x: np.ndarray) -> SuffStatDerivatives:
        ...

    @abstractmethod
    def _base_measure(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def log_partition(self, thetas: np.ndarray) -> np.ndarray:
        """a(theta) for an (..., p) array of natural parameters"""

    @abstractmethod
    def mle(self, data) -> np.ndarray:
        """Natural-parameter maximum likelihood estimate"""

    def check_support(self, x) -> np.ndarray:
        """Validate one observation and return it as a float d-vector"""
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.shape != (self.data_dim,):
            raise DomainError(
                f"{self.name}: expected a {self.data_dim}-dimensional observation, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"{self.name}: non-finite observation {arr.tolist()}")
        for value, tag in zip(arr, self.coordinate_supports):
            if tag == POSITIVE and value <= 0.0:
                raise DomainError(f"{self.name}: observation {arr.tolist()} outside (0, inf)")
        return arr

    def in_param_domain(self, theta) -> bool:
        lower, upper = self.param_domain
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta > lower) and np.all(theta < upper))

    def as_data_matrix(self, data) -> np.ndarray:
        matrix = np.asarray(data, dtype=float).reshape(-1, self.data_dim)
        if matrix.shape[0] == 0:
            raise DegenerateDataError(f"{self.name}: no observations to estimate from")
        for row in matrix:
            self.check_support(row)
        return matrix

    def suff_stat(self, x) -> np.ndarray:
        return self._suff_stat(self.check_support(x))

    def derivatives(self, x) -> SuffStatDerivatives:
        return self._derivatives(self.check_support(x))

    def base_measure(self, x) -> float:
        return self._base_measure(self.check_support(x))

    def log_density_unnorm(self, theta, x) -> float:
        """theta^T r(x) + b(x); the normaliser a(theta) is left out"""
        x = self.check_support(x)
        if not self.in_param_domain(theta):
            raise DomainError(f"{self.name}: parameter {np.asarray(theta).tolist()} outside its domain")
        return float(np.dot(theta, self._suff_stat(x)) + self._base_measure(x))

    def log_density(self, thetas: np.ndarray, x) -> np.ndarray:
        """Fully normalised log p_theta(x) for a stack of parameters"""
        x = self.check_support(x)
        thetas = np.atleast_2d(thetas)
        with np.errstate(divide="ignore", invalid="ignore"):
            return thetas @ self._suff_stat(x) + self._base_measure(x) - self.log_partition(thetas)

    def score(self, theta, x) -> np.ndarray:
        """grad_x log p_theta(x) = grad r(x) theta + grad b(x)"""
        deriv = self.derivatives(x)
        return deriv.jacobian @ np.asarray(theta, dtype=float) + deriv.base_grad

    def closed_form_log_predictive(self, mean: np.ndarray, covariance: np.ndarray, x) -> float:
        raise UnsupportedPredictiveError(f"No closed-form predictive registered for model '{self.name}'")

    @property
    def has_closed_form_predictive(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class UnivariateGaussian(NaturalExpFamilyModel):
    """theta = (mu / sigma^2, 1 / sigma^2), r(x) = (x, -x^2 / 2), b = 0"""

    name = "gaussian"
    data_dim = 1
    param_dim = 2

    @property
    def param_domain(self):
        return np.array([-np.inf, 0.0]), np.array([np.inf, np.inf])

    @property
    def coordinate_supports(self):
        return (REAL,)

    def _suff_stat(self, x):
        return np.array([x[0], -0.5 * x[0] ** 2])

    def _derivatives(self, x):
        return SuffStatDerivatives(
            jacobian=np.array([[1.0, -x[0]]]),
            second_diag=np.array([[0.0, -1.0]]),
            base_grad=np.zeros(1),
        )

    def _base_measure(self, x):
        return 0.0

    def log_partition(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        t1, t2 = thetas[..., 0], thetas[..., 1]
        return t1 ** 2 / (2.0 * t2) - 0.5 * np.log(t2) + 0.5 * _LOG_2PI

    def mle(self, data):
        values = self.as_data_matrix(data)[:, 0]
        variance = float(np.var(values))
        if variance <= 0.0:
            raise DegenerateDataError("gaussian: zero sample variance, MLE does not exist")
        return np.array([values.mean() / variance, 1.0 / variance])


class GaussianKnownVariance(NaturalExpFamilyModel):
    """Gaussian with fixed variance: theta = mu / sigma^2, r(x) = x"""

    data_dim = 1
    param_dim = 1

    def __init__(self, variance: float = 1.0):
        if not variance > 0.0:
            raise ValueError(f"Known variance must be positive, got {variance}")
        self.variance = float(variance)
        self.name = f"gaussian_known_variance:{self.variance:g}"

    @property
    def param_domain(self):
        return np.array([-np.inf]), np.array([np.inf])

    @property
    def coordinate_supports(self):
        return (REAL,)

    def _suff_stat(self, x):
        return np.array([x[0]])

    def _derivatives(self, x):
        return SuffStatDerivatives(
            jacobian=np.array([[1.0]]),
            second_diag=np.array([[0.0]]),
            base_grad=np.array([-x[0] / self.variance]),
        )

    def _base_measure(self, x):
        return -0.5 * x[0] ** 2 / self.variance - 0.5 * (_LOG_2PI + np.log(self.variance))

    def log_partition(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        return 0.5 * self.variance * thetas[..., 0] ** 2

    def mle(self, data):
        values = self.as_data_matrix(data)[:, 0]
        return np.array([values.mean() / self.variance])

    @property
    def has_closed_form_predictive(self) -> bool:
        return True

    def closed_form_log_predictive(self, mean, covariance, x) -> float:
        # theta ~ N(m, v) and x | theta ~ N(theta sigma^2, sigma^2)
        x = self.check_support(x)
        s2 = self.variance
        loc = float(mean[0]) * s2
        var = float(covariance[0, 0]) * s2 ** 2 + s2
        return float(-0.5 * (_LOG_2PI + np.log(var)) - 0.5 * (x[0] - loc) ** 2 / var)


class Exponential(NaturalExpFamilyModel):
    """Rate theta > 0, r(x) = -x, support (0, inf)"""

    name = "exponential"
    data_dim = 1
    param_dim = 1

    @property
    def param_domain(self):
        return np.array([0.0]), np.array([np.inf])

    @property
    def coordinate_supports(self):
        return (POSITIVE,)

    def _suff_stat(self, x):
        return np.array([-x[0]])

    def _derivatives(self, x):
        return SuffStatDerivatives(
            jacobian=np.array([[-1.0]]),
            second_diag=np.array([[0.0]]),
            base_grad=np.zeros(1),
        )

    def _base_measure(self, x):
        return 0.0

    def log_partition(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        return -np.log(thetas[..., 0])

    def mle(self, data):
        values = self.as_data_matrix(data)[:, 0]
        return np.array([1.0 / values.mean()])


class Gamma(NaturalExpFamilyModel):
    """theta = (shape - 1, rate), r(x) = (log x, -x), support (0, inf)"""

    name = "gamma"
    data_dim = 1
    param_dim = 2

    newton_tolerance = 1e-10
    newton_max_iter = 100

    @property
    def param_domain(self):
        return np.array([-1.0, 0.0]), np.array([np.inf, np.inf])

    @property
    def coordinate_supports(self):
        return (POSITIVE,)

    def _suff_stat(self, x):
        return np.array([np.log(x[0]), -x[0]])

    def _derivatives(self, x):
        return SuffStatDerivatives(
            jacobian=np.array([[1.0 / x[0], -1.0]]),
            second_diag=np.array([[-1.0 / x[0] ** 2, 0.0]]),
            base_grad=np.zeros(1),
        )

    def _base_measure(self, x):
        return 0.0

    def log_partition(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        shape = thetas[..., 0] + 1.0
        return gammaln(shape) - shape * np.log(thetas[..., 1])

    def mle(self, data):
        values = self.as_data_matrix(data)[:, 0]
        mean = values.mean()
        s = float(np.log(mean) - np.mean(np.log(values)))
        if s <= 0.0:
            raise DegenerateDataError("gamma: constant sample, MLE does not exist")
        # Newton on log k - digamma(k) = s from the usual closed-form start
        shape = (3.0 - s + np.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
        for _ in range(self.newton_max_iter):
            f = np.log(shape) - digamma(shape) - s
            step = f / (1.0 / shape - polygamma(1, shape))
            new_shape = shape - step
            if new_shape <= 0.0:
                new_shape = shape / 2.0
            if abs(new_shape - shape) <= self.newton_tolerance * max(1.0, shape):
                shape = new_shape
                break
            shape = new_shape
        else:
            logger.warning("gamma MLE: Newton did not converge in %d iterations", self.newton_max_iter)
        return np.array([shape - 1.0, shape / mean])


class ProductModel(NaturalExpFamilyModel):
    """Independent blocks: x and theta are concatenations of the factors'"""

    def __init__(self, parts: Sequence[NaturalExpFamilyModel], name: str = ""):
        if not parts:
            raise ValueError("Product model needs at least one factor")
        self.parts: List[NaturalExpFamilyModel] = list(parts)
        self.data_dim = sum(p.data_dim for p in self.parts)
        self.param_dim = sum(p.param_dim for p in self.parts)
        self.name = name or "product:" + ",".join(p.name for p in self.parts)
        self._data_slices = _block_slices([p.data_dim for p in self.parts])
        self._param_slices = _block_slices([p.param_dim for p in self.parts])

    @property
    def param_domain(self):
        lowers, uppers = zip(*(p.param_domain for p in self.parts))
        return np.concatenate(lowers), np.concatenate(uppers)

    @property
    def coordinate_supports(self):
        return tuple(tag for p in self.parts for tag in p.coordinate_supports)

    def _suff_stat(self, x):
        return np.concatenate([p._suff_stat(x[ds]) for p, ds in zip(self.parts, self._data_slices)])

    def _derivatives(self, x):
        jacobian = np.zeros((self.data_dim, self.param_dim))
        second = np.zeros((self.data_dim, self.param_dim))
        base_grad = np.zeros(self.data_dim)
        for part, ds, ps in zip(self.parts, self._data_slices, self._param_slices):
            block = part._derivatives(x[ds])
            jacobian[ds, ps] = block.jacobian
            second[ds, ps] = block.second_diag
            base_grad[ds] = block.base_grad
        return SuffStatDerivatives(jacobian=jacobian, second_diag=second, base_grad=base_grad)

    def _base_measure(self, x):
        return float(sum(p._base_measure(x[ds]) for p, ds in zip(self.parts, self._data_slices)))

    def log_partition(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        return sum(p.log_partition(thetas[..., ps]) for p, ps in zip(self.parts, self._param_slices))

    def mle(self, data):
        matrix = self.as_data_matrix(data)
        return np.concatenate([p.mle(matrix[:, ds]) for p, ds in zip(self.parts, self._data_slices)])


def _block_slices(sizes: Sequence[int]) -> List[slice]:
    slices, start = [], 0
    for size in sizes:
        slices.append(slice(start, start + size))
        start += size
    return slices


def diag_gaussian(dim: int) -> ProductModel:
    """Multivariate diagonal Gaussian as a product of univariate factors"""
    if dim < 1:
        raise ValueError(f"diag_gaussian needs a positive dimension, got {dim}")
    return ProductModel([UnivariateGaussian() for _ in range(dim)], name=f"diag_gaussian:{dim}")


def build_model(model_id: str) -> NaturalExpFamilyModel:
    """Resolve a model identifier such as 'gamma' or 'product:exponential,gaussian'"""
    model_id = model_id.strip()
    head, _, arg = model_id.partition(":")
    head = head.strip().lower()
    if head == "product":
        if not arg:
            raise ValueError("product model needs factors, e.g. 'product:exponential,gaussian'")
        return ProductModel([build_model(part) for part in _split_product(arg)])
    if head == "gaussian":
        return UnivariateGaussian()
    if head == "gaussian_known_variance":
        return GaussianKnownVariance(float(arg) if arg else 1.0)
    if head == "diag_gaussian":
        return diag_gaussian(int(arg) if arg else 2)
    if head == "exponential":
        return Exponential()
    if head == "gamma":
        return Gamma()
    raise ValueError(f"Unknown model identifier '{model_id}'")


def _split_product(arg: str) -> List[str]:
    # factors are comma separated; a factor argument never contains a comma
    return [part.strip() for part in arg.split(",") if part.strip()]
