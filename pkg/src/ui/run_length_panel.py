"""RunLengthPanel: the most probable run lengths at the current step as bars"""

from typing import List, Tuple

import numpy as np
from textual.widgets import Static

from models.segmentation_result import TraceStep

BAR_WIDTH = 40


class RunLengthPanel(Static):
    """Text bar chart of p(r_t | x_1:t) over the top hypotheses"""

    def __init__(self, top: int = 10, **kwargs):
        super().__init__("waiting for data", **kwargs)
        self.top = top
        self._rows: List[Tuple[int, float]] = []

    @property
    def rows(self) -> List[Tuple[int, float]]:
        return list(self._rows)

    def show_step(self, record: TraceStep) -> None:
        probs = np.exp(record.log_probs)
        order = np.argsort(-probs)[: self.top]
        self._rows = [(int(record.run_lengths[i]), float(probs[i])) for i in order]
        lines = [f"t = {record.t}"]
        for run_length, prob in self._rows:
            bar = "█" * int(round(prob * BAR_WIDTH))
            lines.append(f"r={run_length:>6} {prob:6.3f} {bar}")
        self.update("\n".join(lines))
