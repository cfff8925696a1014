"""
Per-frame execution-time model.

A frame costs a fixed detection pass plus association, and a feature
encoding pass per detection:

    tau = (od_ms + ta_ms) + fe_ms * d_k
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple

if TYPE_CHECKING:
    from edgewatch.evaluation.bench import BenchReport


@dataclass(frozen=True)
class TimingModel:
    od_ms: float = 92.0
    fe_ms: float = 38.0
    ta_ms: float = 4.0

    def validate(self) -> List[str]:
        errors = []
        for name in ("od_ms", "fe_ms", "ta_ms"):
            value = getattr(self, name)
            if value < 0:
                errors.append(f"{name} must be >= 0, got {value}")
        return errors

    @property
    def fixed_ms(self) -> float:
        return self.od_ms + self.ta_ms

    @classmethod
    def from_bench(cls, report: "BenchReport", od_ms: Optional[float] = None) -> "TimingModel":
        """
        Retarget the model to measured costs. Association is the associate
        plus anomaly stage means; encoding is the measured per-detection
        encoder cost. Detection runs out of process, so od_ms is kept.
        """
        od = cls.od_ms if od_ms is None else od_ms
        return cls(
            od_ms=od,
            fe_ms=report.encode_ms_per_detection,
            ta_ms=report.stages["associate"].mean_ms + report.stages["anomaly"].mean_ms,
        )


def predict_time(model: TimingModel, d_k: int) -> Tuple[float, float]:
    """Return (tau in ms, frames per second) for d_k detections in a frame."""
    if d_k < 0:
        raise ValueError(f"Detection count must be >= 0, got {d_k}")
    tau = model.fixed_ms + model.fe_ms * d_k
    fps = 1000.0 / tau if tau > 0 else float("inf")
    return tau, fps


__all__ = ["TimingModel", "predict_time"]
