"""Run-length filter: joint-mass recursion, top-k pruning and MAP segmentation"""

import heapq
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from lib.bocd_errors import ZeroDensityError
from lib.segment_models import SegmentModel
from models.run_length_state import HazardSpec, RunLengthEntry, RunLengthState
from models.segmentation_result import TraceStep

logger = logging.getLogger(__name__)


def initial_state(segment_model: SegmentModel) -> RunLengthState:
    """State at t = 0: a single empty segment carrying the prior"""
    return RunLengthState(
        time=0,
        entries=[RunLengthEntry(run_length=0, log_joint=0.0, posterior=segment_model.prior(), map_score=0.0)],
        log_evidence=0.0,
    )


def step(
    state: RunLengthState,
    x: np.ndarray,
    segment_model: SegmentModel,
    hazard: HazardSpec,
    prune_k: Optional[int] = 50,
) -> Tuple[RunLengthState, TraceStep]:
    """Advance the filter by one observation.

    Every entry (r, L) grows to r + 1 with mass L + log p(x | r) + log(1 - h);
    all entries feed r = 0 with L + log p(x | prior) + log h. The retained
    entry posteriors absorb x afterwards. Viterbi scores follow the same
    lattice with max in place of logsumexp.
    """
    t = state.time + 1
    prior = segment_model.prior()
    log_pred_prior = segment_model.log_predictive(prior, x, (t, 0))

    # (run_length, log_joint, map_score, parent entry)
    candidates = []
    for entry in state.entries:
        if segment_model.is_prior(entry.posterior):
            log_pred = log_pred_prior
        else:
            log_pred = segment_model.log_predictive(entry.posterior, x, (t, entry.run_length + 1))
        candidates.append((
            entry.run_length + 1,
            entry.log_joint + log_pred + hazard.log_1mh,
            entry.map_score + log_pred + hazard.log_1mh,
            entry,
        ))

    previous_joints = state.log_joints
    previous_scores = np.array([e.map_score for e in state.entries])
    best_parent = int(np.argmax(previous_scores))
    candidates.append((
        0,
        float(logsumexp(previous_joints)) + log_pred_prior + hazard.log_h,
        float(previous_scores[best_parent]) + log_pred_prior + hazard.log_h,
        None,
    ))

    joints = np.array([c[1] for c in candidates])
    if not np.any(np.isfinite(joints)):
        raise ZeroDensityError(t, np.ravel(x).tolist())

    kept = _prune(candidates, prune_k)
    entries = []
    for run_length, log_joint, map_score, parent in kept:
        source = prior if parent is None else parent.posterior
        entries.append(RunLengthEntry(
            run_length=run_length,
            log_joint=log_joint,
            posterior=segment_model.update(source, x),
            map_score=map_score,
        ))

    new_state = RunLengthState(time=t, entries=entries)
    new_state.log_evidence = float(logsumexp(new_state.log_joints))
    logger.debug("t=%d kept %d of %d run lengths", t, len(entries), len(candidates))

    record = TraceStep(
        t=t,
        run_lengths=new_state.run_lengths,
        log_probs=new_state.log_posterior(),
        map_scores=np.array([e.map_score for e in entries]),
        changepoint_parent=int(state.entries[best_parent].run_length),
    )
    return new_state, record


def _prune(candidates: List[tuple], prune_k: Optional[int]) -> List[tuple]:
    """Keep the k largest joints, always including r = 0, sorted by run length"""
    if prune_k is None or len(candidates) <= prune_k:
        kept = list(candidates)
    else:
        kept = heapq.nlargest(prune_k, candidates, key=lambda c: c[1])
        if not any(c[0] == 0 for c in kept):
            kept[-1] = next(c for c in candidates if c[0] == 0)
    return sorted(kept, key=lambda c: c[0])


def map_segmentation(trace: Sequence[TraceStep]) -> List[int]:
    """Backtrack the Viterbi lattice from the best final hypothesis.

    A hypothesis (t, r) belongs to a segment starting at t - r; a start
    after t = 1 is a changepoint whose best predecessor at t - r - 1 was
    recorded as ``changepoint_parent`` of that step.
    """
    if not trace:
        return []
    by_time: Dict[int, TraceStep] = {s.t: s for s in trace}
    last = trace[-1]
    t = last.t
    r = int(last.run_lengths[int(np.argmax(last.map_scores))])
    changepoints = []
    while True:
        start = t - r
        if start <= 1:
            break
        changepoints.append(start)
        t = start - 1
        r = by_time[start].changepoint_parent
    return sorted(changepoints)


def modal_run_lengths(trace: Sequence[TraceStep]) -> List[int]:
    return [int(s.run_lengths[int(np.argmax(s.log_probs))]) for s in trace]


def modal_changepoints(trace: Sequence[TraceStep]) -> List[int]:
    """Segment starts implied whenever the modal run length drops"""
    modes = modal_run_lengths(trace)
    starts = set()
    for prev, cur, s in zip(modes, modes[1:], trace[1:]):
        if cur < prev and s.t - cur > 1:
            starts.add(s.t - cur)
    return sorted(starts)
