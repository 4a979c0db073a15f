"""Synthetic stream description: piecewise i.i.d. segments plus contamination"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from lib.bocd_errors import StreamSpecError

# distribution name -> parameter names
DISTRIBUTIONS: Dict[str, Tuple[str, ...]] = {
    "gaussian": ("mean", "sd"),
    "exponential": ("rate",),
    "gamma": ("shape", "rate"),
}


@dataclass(frozen=True)
class ComponentSpec:
    """Distribution of one data coordinate within a segment"""

    distribution: str
    params: Tuple[float, ...]

    @property
    def positive_support(self) -> bool:
        return self.distribution in ("exponential", "gamma")


@dataclass(frozen=True)
class SegmentSpec:
    """A regime starting at 1-based time ``start``"""

    start: int
    components: Tuple[ComponentSpec, ...]


@dataclass(frozen=True)
class ContaminationSpec:
    rate: float = 0.0
    value: Optional[Tuple[float, ...]] = None
    scale: float = 0.0


@dataclass(frozen=True)
class StreamSpec:
    length: int
    dim: int
    segments: Tuple[SegmentSpec, ...]
    contamination: ContaminationSpec = field(default_factory=ContaminationSpec)
    seed: int = 0

    @property
    def changepoints(self) -> Tuple[int, ...]:
        return tuple(s.start for s in self.segments[1:])

    def with_seed(self, seed: int) -> "StreamSpec":
        return StreamSpec(self.length, self.dim, self.segments, self.contamination, seed)

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        for segment in payload["segments"]:
            for component in segment["components"]:
                component["params"] = list(component["params"])
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "StreamSpec":
        try:
            segments = tuple(
                SegmentSpec(
                    start=int(seg["start"]),
                    components=tuple(
                        ComponentSpec(str(c["distribution"]), tuple(float(v) for v in c["params"]))
                        for c in seg["components"]
                    ),
                )
                for seg in payload["segments"]
            )
            raw = payload.get("contamination") or {}
            value = raw.get("value")
            contamination = ContaminationSpec(
                rate=float(raw.get("rate", 0.0)),
                value=None if value is None else tuple(float(v) for v in value),
                scale=float(raw.get("scale", 0.0)),
            )
            return cls(
                length=int(payload["length"]),
                dim=int(payload["dim"]),
                segments=segments,
                contamination=contamination,
                seed=int(payload.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StreamSpecError(f"Malformed stream spec: {exc}") from exc
