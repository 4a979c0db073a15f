from dataclasses import dataclass


@dataclass
class ChangepointInfo:
    """A changepoint reported while streaming, with when and how confidently it was seen"""

    time: int
    detected_at: int
    run_length: int
    probability: float

    @property
    def delay(self) -> int:
        return self.detected_at - self.time
