"""Shared fixtures for the changepoint-detection test suite"""

import numpy as np
import pytest

from lib.exp_family import build_model
from models.detector_config import build_config

MODEL_IDS = [
    "gaussian",
    "gaussian_known_variance:2",
    "exponential",
    "gamma",
    "product:exponential,gaussian",
    "diag_gaussian:2",
]


def sample_data(model, rng, n):
    """Draws that lie in the model's support"""
    columns = []
    for tag in model.coordinate_supports:
        if tag == "positive":
            columns.append(rng.gamma(3.0, 1.0, size=n))
        else:
            columns.append(rng.normal(0.5, 1.5, size=n))
    return np.column_stack(columns)


def interior_theta(model, rng):
    """A random natural parameter well inside the domain"""
    lower, _ = model.param_domain
    theta = rng.normal(0.0, 1.0, size=model.param_dim)
    bounded = np.isfinite(lower)
    theta[bounded] = lower[bounded] + rng.uniform(0.5, 2.0, size=int(bounded.sum()))
    return theta


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=MODEL_IDS)
def model(request):
    return build_model(request.param)


@pytest.fixture
def known_variance_config():
    """Fast closed-form D_m detector on unit-variance data"""
    def make(**overrides):
        values = {
            "model": "gaussian_known_variance:1",
            "prior.mean": [0.0],
            "prior.cov_diag": [10.0],
            "diffusion.kind": "robust",
            "diffusion.anchor_policy": "explicit:1",
            "omega": "fixed:0.5",
            "predictive": "closed_form",
        }
        values.update(overrides)
        return build_config(values)
    return make


@pytest.fixture
def standard_config():
    def make(**overrides):
        values = {
            "model": "gaussian",
            "method": "standard",
            "baseline.family": "normal_inverse_gamma",
            "baseline.hyperparams": [0.0, 0.1, 2.0, 2.0],
        }
        values.update(overrides)
        return build_config(values)
    return make


@pytest.fixture
def shifted_series(rng):
    """Unit-variance series with a mean jump of 6 at t = 61"""
    data = rng.normal(0.0, 1.0, size=(120, 1))
    data[60:] += 6.0
    return data
