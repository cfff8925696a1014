"""
Thresholds for the anomaly rules and the template path.
"""

from dataclasses import dataclass
from typing import List
import math

from edgewatch.anomaly.events import MIN_GROUP_SIZE


@dataclass(frozen=True)
class AnomalyParams:
    # loitering
    still_radius: float = 10.0
    still_frames: int = 75
    # fast motion
    k_sigma: float = 3.0
    abs_speed: float = 6.0
    speed_window: int = 5
    min_scene_samples: int = 30
    # circular / spiral
    min_winding: float = 2 * math.pi
    winding_slack: float = 0.1
    closure_frac: float = 0.35
    circle_window: int = 90
    heading_step: float = 4.0
    # jumping
    jump_factor: float = 3.0
    jump_window: int = 15
    min_jump_px: float = 10.0
    return_tolerance: float = 0.2
    jump_span_fraction: float = 0.05
    # gathering / dispersion
    meet_radius: float = 80.0
    converge_frames: int = 10
    min_group: int = 4
    min_approach: float = 5.0
    eval_stride: int = 5
    max_sample_gap: int = 2
    # events
    merge_gap: int = 5
    rules_enabled: bool = True
    # template path
    templates_enabled: bool = False
    template_window: int = 30
    template_length: int = 10
    template_threshold: float = 0.9

    def validate(self) -> List[str]:
        errors: List[str] = []
        positive = {
            "still_radius": self.still_radius,
            "abs_speed": self.abs_speed,
            "min_winding": self.min_winding,
            "heading_step": self.heading_step,
            "jump_factor": self.jump_factor,
            "min_jump_px": self.min_jump_px,
            "meet_radius": self.meet_radius,
            "min_approach": self.min_approach,
        }
        for name, value in positive.items():
            if not value > 0:
                errors.append(f"{name} must be positive, got {value}")
        at_least_one = {
            "still_frames": self.still_frames,
            "speed_window": self.speed_window,
            "circle_window": self.circle_window,
            "converge_frames": self.converge_frames,
            "eval_stride": self.eval_stride,
            "template_length": self.template_length,
        }
        for name, value in at_least_one.items():
            if value < 1:
                errors.append(f"{name} must be >= 1, got {value}")
        if self.jump_window < 3:
            errors.append(f"jump_window must be >= 3, got {self.jump_window}")
        if self.template_window < 2:
            errors.append(f"template_window must be >= 2, got {self.template_window}")
        if self.k_sigma < 0:
            errors.append(f"k_sigma must be non-negative, got {self.k_sigma}")
        if self.min_group < MIN_GROUP_SIZE:
            errors.append(
                f"min_group must be >= {MIN_GROUP_SIZE}, got {self.min_group}"
            )
        if self.min_scene_samples < 0 or self.merge_gap < 0 or self.max_sample_gap < 0:
            errors.append("min_scene_samples, merge_gap and max_sample_gap must be >= 0")
        for name, value in (
            ("winding_slack", self.winding_slack),
            ("closure_frac", self.closure_frac),
            ("return_tolerance", self.return_tolerance),
            ("jump_span_fraction", self.jump_span_fraction),
            ("template_threshold", self.template_threshold),
        ):
            if not 0.0 <= value <= 1.0:
                errors.append(f"{name} must lie in [0, 1], got {value}")
        return errors

    @property
    def winding_threshold(self) -> float:
        return (1.0 - self.winding_slack) * self.min_winding
