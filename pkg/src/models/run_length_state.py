"""Run-length filter state: retained hypotheses, hazard and evidence"""

from dataclasses import dataclass, field
from typing import Any, List

import numpy as np
from scipy.special import logsumexp


@dataclass(frozen=True)
class HazardSpec:
    """Constant changepoint hazard"""

    h: float = 0.01
    kind: str = "constant"

    def __post_init__(self):
        if self.kind != "constant":
            raise ValueError(f"Unsupported hazard kind '{self.kind}'")
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"Hazard must lie in (0, 1), got {self.h}")

    @property
    def log_h(self) -> float:
        return float(np.log(self.h))

    @property
    def log_1mh(self) -> float:
        return float(np.log1p(-self.h))


@dataclass
class RunLengthEntry:
    """One run-length hypothesis with its segment posterior"""

    run_length: int
    log_joint: float
    posterior: Any
    # Viterbi score of the best path ending in this hypothesis
    map_score: float = 0.0


@dataclass
class RunLengthState:
    """Pruned set of run-length hypotheses at time t"""

    time: int
    entries: List[RunLengthEntry] = field(default_factory=list)
    log_evidence: float = 0.0

    @property
    def run_lengths(self) -> np.ndarray:
        return np.array([e.run_length for e in self.entries], dtype=int)

    @property
    def log_joints(self) -> np.ndarray:
        return np.array([e.log_joint for e in self.entries], dtype=float)

    def log_posterior(self) -> np.ndarray:
        """Normalized log p(r_t | x_1:t) over the retained entries"""
        joints = self.log_joints
        return joints - logsumexp(joints)

    def modal_run_length(self) -> int:
        return int(self.entries[int(np.argmax(self.log_joints))].run_length)
