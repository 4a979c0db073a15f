"""Tests for the run-length recursion, pruning and MAP extraction"""

import itertools

import numpy as np
import pytest
from scipy.special import logsumexp

from lib import standard_bayes
from lib.bocd_errors import ZeroDensityError
from lib.dsm_posterior import batch_posterior, make_prior
from lib.exp_family import build_model
from lib.run_length_filter import initial_state, map_segmentation, modal_changepoints, modal_run_lengths, step
from lib.segment_models import (
    CLOSED_FORM,
    MONTE_CARLO,
    ConjugateSegmentModel,
    DsmSegmentModel,
    SegmentModel,
    keyed_stream,
    log_pred_dm,
)
from models.diffusion_spec import ROBUST, DiffusionMatrixSpec
from models.run_length_state import HazardSpec
from models.segmentation_result import TraceStep

HAZARD = HazardSpec(0.2)


def _run(segment_model, xs, hazard=HAZARD, prune_k=None):
    state = initial_state(segment_model)
    trace = []
    for x in xs:
        state, record = step(state, np.atleast_1d(x), segment_model, hazard, prune_k)
        trace.append(record)
    return state, trace


def _enumerate(xs, segment_log_pred, h):
    """Exact joints by summing over every changepoint indicator sequence.

    ``segment_log_pred(segment, x, t, r)`` predicts x from the data seen in
    the current segment; r is the run length the hypothesis grows into.
    """
    by_run_length = {}
    best = (-np.inf, None)
    for flags in itertools.product([0, 1], repeat=len(xs)):
        log_joint, r, segment = 0.0, 0, []
        for t, (flag, x) in enumerate(zip(flags, xs), start=1):
            if flag:
                log_joint += np.log(h) + segment_log_pred([], x, t, 0)
                segment, r = [x], 0
            else:
                log_joint += np.log1p(-h) + segment_log_pred(segment, x, t, r + 1 if segment else 0)
                segment, r = segment + [x], r + 1
        by_run_length.setdefault(r, []).append(log_joint)
        if log_joint > best[0]:
            best = (log_joint, flags)
    joints = {r: float(logsumexp(v)) for r, v in by_run_length.items()}
    changepoints = [t for t, flag in enumerate(best[1], start=1) if flag and t > 1]
    return joints, changepoints


def _assert_matches_enumeration(state, trace, joints, changepoints, tol):
    assert sorted(joints) == sorted(e.run_length for e in state.entries)
    for entry in state.entries:
        assert entry.log_joint == pytest.approx(joints[entry.run_length], abs=tol)
    assert state.log_evidence == pytest.approx(float(logsumexp(list(joints.values()))), abs=tol)
    assert map_segmentation(trace) == changepoints


XS = [0.1, -0.4, 0.3, 4.1, 3.8, 4.4, 3.9, 4.2]


def test_standard_filter_matches_enumeration():
    prior = standard_bayes.normal_known_variance(0.0, 4.0, 1.0)

    def log_pred(segment, x, t, r):
        return standard_bayes.log_predictive(standard_bayes.batch_update(prior, np.array(segment)), [x])

    state, trace = _run(ConjugateSegmentModel(prior), XS)
    joints, changepoints = _enumerate(XS, log_pred, HAZARD.h)
    _assert_matches_enumeration(state, trace, joints, changepoints, 1e-8)
    assert changepoints == [4]


def test_dsm_closed_form_filter_matches_enumeration():
    model = build_model("gaussian_known_variance:1")
    spec = DiffusionMatrixSpec(ROBUST, np.array([1.0]))
    prior = make_prior(model, [0.0], [4.0])
    segment_model = DsmSegmentModel(model, spec, prior, 0.7, predictive=CLOSED_FORM)

    def log_pred(segment, x, t, r):
        post = batch_posterior(model, spec, prior, 0.7, np.array(segment).reshape(-1, 1))
        return model.closed_form_log_predictive(post.mean, post.covariance, [x])

    state, trace = _run(segment_model, XS)
    joints, changepoints = _enumerate(XS, log_pred, HAZARD.h)
    _assert_matches_enumeration(state, trace, joints, changepoints, 1e-8)


def test_dsm_monte_carlo_filter_matches_enumeration_with_shared_streams():
    model = build_model("gaussian")
    spec = DiffusionMatrixSpec(ROBUST, np.array([0.0, 1.0]))
    prior = make_prior(model, [0.0, 1.0], [10.0, 1.0])
    segment_model = DsmSegmentModel(model, spec, prior, 0.3, predictive=MONTE_CARLO, samples=200, seed=7)
    xs = XS[:6]

    def log_pred(segment, x, t, r):
        post = batch_posterior(model, spec, prior, 0.3, np.array(segment).reshape(-1, 1))
        return log_pred_dm(post, model, [x], MONTE_CARLO, keyed_stream(7, t, r), 200)

    state, trace = _run(segment_model, xs)
    joints, changepoints = _enumerate(xs, log_pred, HAZARD.h)
    _assert_matches_enumeration(state, trace, joints, changepoints, 1e-8)


def test_first_step_splits_hazard():
    prior = standard_bayes.normal_inverse_gamma(0.0, 1.0, 2.0, 2.0)
    _, trace = _run(ConjugateSegmentModel(prior), [0.5], hazard=HazardSpec(0.01))
    np.testing.assert_array_equal(trace[0].run_lengths, [0, 1])
    np.testing.assert_allclose(np.exp(trace[0].log_probs), [0.01, 0.99], rtol=1e-12)


def test_run_length_posterior_is_normalised(shifted_series):
    prior = standard_bayes.normal_inverse_gamma(0.0, 0.1, 2.0, 2.0)
    _, trace = _run(ConjugateSegmentModel(prior), shifted_series, hazard=HazardSpec(0.01), prune_k=50)
    for record in trace:
        assert float(logsumexp(record.log_probs)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model_id, predictive", [("gaussian", MONTE_CARLO), ("gaussian_known_variance:1", CLOSED_FORM)])
def test_dsm_run_length_posterior_is_normalised(shifted_series, model_id, predictive):
    model = build_model(model_id)
    prior = make_prior(model, np.r_[0.0, 1.0][: model.param_dim], np.full(model.param_dim, 4.0))
    segment_model = DsmSegmentModel(model, DiffusionMatrixSpec(), prior, 0.5, predictive=predictive, samples=200)
    _, trace = _run(segment_model, shifted_series, hazard=HazardSpec(0.01), prune_k=50)
    for record in trace:
        assert float(logsumexp(record.log_probs)) == pytest.approx(0.0, abs=1e-12)


def test_pruning_keeps_k_entries_including_zero(rng):
    prior = standard_bayes.normal_inverse_gamma(0.0, 0.1, 2.0, 2.0)
    state, trace = _run(ConjugateSegmentModel(prior), rng.normal(size=60), hazard=HazardSpec(0.01), prune_k=5)
    for record in trace:
        assert len(record.run_lengths) <= 5
        assert 0 in record.run_lengths
        assert list(record.run_lengths) == sorted(record.run_lengths)
    assert len(state.entries) == 5


def test_map_segmentation_finds_mean_shift(shifted_series):
    prior = standard_bayes.normal_inverse_gamma(0.0, 0.1, 2.0, 2.0)
    _, trace = _run(ConjugateSegmentModel(prior), shifted_series, hazard=HazardSpec(0.01), prune_k=50)
    changepoints = map_segmentation(trace)
    assert len(changepoints) == 1
    assert abs(changepoints[0] - 61) <= 1


class _Impossible(SegmentModel):
    def prior(self):
        return standard_bayes.normal_known_variance(0.0, 1.0, 1.0)

    def log_predictive(self, posterior, x, key):
        return -np.inf

    def update(self, posterior, x):
        return standard_bayes.update(posterior, x)


def test_zero_density_everywhere():
    with pytest.raises(ZeroDensityError) as info:
        _run(_Impossible(), [1.5])
    assert info.value.t == 1


def _trace_from_modes(modes):
    return [
        TraceStep(t=t, run_lengths=np.array([m]), log_probs=np.array([0.0]), map_scores=np.zeros(1),
                  changepoint_parent=0)
        for t, m in enumerate(modes, start=1)
    ]


def test_modal_changepoints_follow_drops():
    trace = _trace_from_modes([1, 2, 3, 4, 0, 1, 2, 1, 2])
    assert modal_run_lengths(trace) == [1, 2, 3, 4, 0, 1, 2, 1, 2]
    assert modal_changepoints(trace) == [5, 7]


def test_empty_trace():
    assert map_segmentation([]) == []
    assert modal_changepoints([]) == []


@pytest.mark.slow
def test_pruning_to_fifty_keeps_the_modal_run_length():
    model = build_model("gaussian_known_variance:1")
    segment_model = DsmSegmentModel(model, DiffusionMatrixSpec(), make_prior(model, [0.0], [4.0]), 0.5,
                                    predictive=CLOSED_FORM)
    agree = total = 0
    for seed in range(10):
        xs = np.random.default_rng(seed).normal(size=240)
        xs[80:160] += 4.0
        _, exact = _run(segment_model, xs, hazard=HazardSpec(0.01))
        _, pruned = _run(segment_model, xs, hazard=HazardSpec(0.01), prune_k=50)
        exact_modes, pruned_modes = modal_run_lengths(exact), modal_run_lengths(pruned)
        agree += sum(a == b for a, b in zip(exact_modes, pruned_modes))
        total += len(exact_modes)
    assert agree / total >= 0.99
