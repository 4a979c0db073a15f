"""Segmentation result dataclasses"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class TraceStep:
    """Per-step record: retained run lengths, their posterior and Viterbi data"""

    t: int
    run_lengths: np.ndarray
    log_probs: np.ndarray
    map_scores: np.ndarray
    # run length at t-1 of the best predecessor of the r=0 hypothesis
    changepoint_parent: int


@dataclass
class SegmentationResult:
    """Run-length trace, MAP changepoints and timing of one detector run"""

    runlength_trace: List[TraceStep] = field(default_factory=list)
    map_changepoints: List[int] = field(default_factory=list)
    modal_run_lengths: List[int] = field(default_factory=list)
    modal_changepoints: List[int] = field(default_factory=list)
    per_step_nanos: List[int] = field(default_factory=list)
    log_evidence: float = 0.0
    omega: Optional[float] = None
    error: Optional[str] = None

    @property
    def length(self) -> int:
        return len(self.runlength_trace)

    @property
    def total_ms(self) -> float:
        return float(np.sum(self.per_step_nanos, dtype=np.int64)) / 1e6
