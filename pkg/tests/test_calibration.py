"""Tests for learning-rate calibration"""

import numpy as np
import pytest

from lib.bocd_errors import CalibrationError
from lib.dsm_posterior import make_prior
from lib.exp_family import build_model
from lib.standard_bayes import LikelihoodReference, batch_update, normal_inverse_gamma, normal_known_variance
from models.diffusion_spec import IDENTITY, ROBUST, ROBUST_BOUNDARY, DiffusionMatrixSpec
from services.calibration import OmegaObjective, calibrate_omega, gaussian_kl


@pytest.fixture
def known_variance_setup(rng):
    model = build_model("gaussian_known_variance:1")
    prior = make_prior(model, [0.0], [10.0])
    data = rng.normal(0.5, 1.0, size=(100, 1))
    reference = batch_update(normal_known_variance(0.0, 10.0, 1.0), data)
    return model, prior, data, reference


def test_gaussian_kl_closed_form():
    assert gaussian_kl([0.0], [[1.0]], [0.0], [[1.0]]) == pytest.approx(0.0)
    expected = 0.5 * (2.0 / 3.0 + 1.0 / 3.0 - 1.0 + np.log(3.0 / 2.0))
    assert gaussian_kl([1.0], [[2.0]], [0.0], [[3.0]]) == pytest.approx(expected)


def test_monte_carlo_objective_matches_closed_form(known_variance_setup):
    model, prior, data, reference = known_variance_setup
    objective = OmegaObjective(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data, samples=10000)
    for omega in (2.0, 10.0):
        exact = objective(omega)
        assert exact > 0.1
        assert objective.monte_carlo(omega) == pytest.approx(exact, rel=0.02)


def test_identity_weight_recovers_bayes_learning_rate(known_variance_setup):
    # with m = I the known-variance loss posterior equals the Bayes posterior at omega = 1/2
    model, prior, data, reference = known_variance_setup
    result = calibrate_omega(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data)
    assert result.omega == pytest.approx(0.5, rel=1e-2)
    assert result.objective == pytest.approx(0.0, abs=1e-5)
    assert not result.at_boundary


def test_optimum_beats_surrounding_grid(known_variance_setup):
    model, prior, data, reference = known_variance_setup
    spec = DiffusionMatrixSpec(ROBUST, np.array([0.5]))
    result = calibrate_omega(model, spec, prior, reference, data, samples=4096)
    objective = OmegaObjective(model, spec, prior, reference, data, samples=4096)
    grid = result.omega * np.logspace(-1.0, 1.0, 20)
    assert objective(result.omega) <= min(objective(w) for w in grid) + 1e-9


def test_monte_carlo_path_for_truncated_posterior(rng):
    model = build_model("gaussian")
    prior = make_prior(model, [0.0, 1.0], [10.0, 1.0])
    data = rng.normal(0.0, 1.0, size=(60, 1))
    reference = batch_update(normal_inverse_gamma(0.0, 1.0, 2.0, 2.0), data)
    spec = DiffusionMatrixSpec(ROBUST, model.mle(data))
    result = calibrate_omega(model, spec, prior, reference, data, samples=2048, seed=3)
    assert 1e-8 < result.omega < 1e2
    assert np.isfinite(result.objective)
    again = calibrate_omega(model, spec, prior, reference, data, samples=2048, seed=3)
    assert again.omega == result.omega


def test_likelihood_reference_for_gamma(rng):
    model = build_model("gamma")
    prior = make_prior(model, [0.0, 1.0], [50.0, 3.0])
    data = rng.gamma(2.0, 1.0, size=(100, 1))
    spec = DiffusionMatrixSpec(ROBUST_BOUNDARY, model.mle(data))
    result = calibrate_omega(model, spec, prior, LikelihoodReference(model, prior, data), data)
    assert 1e-8 < result.omega < 1e2
    assert result.evaluations > 0


def test_boundary_optimum_is_flagged(known_variance_setup, caplog):
    model, prior, data, reference = known_variance_setup
    with caplog.at_level("WARNING", logger="services.calibration"):
        result = calibrate_omega(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data, bracket=(1e-6, 1e-3))
    assert result.at_boundary
    assert result.omega == pytest.approx(1e-3, rel=1e-2)
    assert "bracket" in caplog.text


def test_degenerate_bracket_returns_lower_end(known_variance_setup):
    model, prior, data, reference = known_variance_setup
    result = calibrate_omega(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data, bracket=(0.2, 0.2))
    assert result.omega == 0.2
    assert result.evaluations == 1


@pytest.mark.parametrize("bracket", [(0.0, 1.0), (1.0, 0.5)])
def test_invalid_bracket(known_variance_setup, bracket):
    model, prior, data, reference = known_variance_setup
    with pytest.raises(CalibrationError):
        calibrate_omega(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data, bracket=bracket)


def test_needs_two_observations(known_variance_setup):
    model, prior, data, reference = known_variance_setup
    with pytest.raises(CalibrationError):
        calibrate_omega(model, DiffusionMatrixSpec(IDENTITY), prior, reference, data[:1])
