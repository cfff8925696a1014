"""
Single-track anomaly rules: loitering, fast motion, circular motion, jumping.

Each rule returns None when it does not fire and a score in (0, 1] when it
does. Scores grow monotonically with the strength of the evidence.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
import math

import numpy as np

from edgewatch.anomaly.features import MotionFeatures, window_arrays
from edgewatch.anomaly.params import AnomalyParams
from edgewatch.anomaly.scene import SceneStats
from edgewatch.geometry import Observation


def detect_loitering(f: MotionFeatures, p: AnomalyParams) -> Optional[float]:
    if f.confinement_radius >= p.still_radius or f.window_len < p.still_frames:
        return None
    tightness = 1.0 - f.confinement_radius / p.still_radius
    duration = min(1.0, f.window_len / (2.0 * p.still_frames))
    return 0.5 * tightness + 0.5 * duration


def fast_threshold(scene: SceneStats, p: AnomalyParams) -> float:
    """mu + k*sigma of the scene speeds, or abs_speed while the scene is thin."""
    std = scene.std
    if std is None or scene.count < p.min_scene_samples:
        return p.abs_speed
    return scene.mean + p.k_sigma * std


def detect_fast_motion(
    f: MotionFeatures, scene: SceneStats, p: AnomalyParams
) -> Optional[float]:
    return speed_score(f.mean_speed, scene, p)


def speed_score(speed: float, scene: SceneStats, p: AnomalyParams) -> Optional[float]:
    threshold = fast_threshold(scene, p)
    if not speed > threshold:
        return None
    scale = max(threshold, 1e-9)
    return 1.0 - math.exp(-(speed - threshold) / scale)


def detect_circular(f: MotionFeatures, p: AnomalyParams) -> Optional[float]:
    turning = abs(f.winding)
    if turning < p.winding_threshold:
        return None
    if not f.net_displacement < p.closure_frac * f.path_length:
        return None
    return 1.0 - math.exp(-turning / p.min_winding)


@dataclass(frozen=True)
class JumpHit:
    score: float
    amplitude: float
    frame_start: int
    frame_end: int


def vertical_excursion(frames: np.ndarray, v: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Residual of v against the chord joining the first and last samples, and
    its peak-to-peak excursion.
    """
    span = float(frames[-1] - frames[0])
    chord = v[0] + (v[-1] - v[0]) * (frames - frames[0]) / span
    residual = v - chord
    return float(residual.max() - residual.min()), residual


def trailing_window(frames: np.ndarray, length: int) -> slice:
    """Slice selecting samples within the last `length` frames."""
    first = frames[-1] - length + 1
    start = int(np.searchsorted(frames, first, side="left"))
    return slice(start, len(frames))


def detect_jump(
    history: Sequence[Tuple[int, Observation]],
    scene: SceneStats,
    p: AnomalyParams,
) -> Optional[JumpHit]:
    """Evaluate the trailing jump_window of a (frame, Observation) history."""
    frames, points = window_arrays(history)
    return jump_from_arrays(frames, points[:, 1], scene, p)


def jump_from_arrays(
    frames: np.ndarray, v: np.ndarray, scene: SceneStats, p: AnomalyParams
) -> Optional[JumpHit]:
    if len(frames) < 3:
        return None
    window = trailing_window(frames, p.jump_window)
    frames, v = frames[window], v[window]
    if len(frames) < 3:
        return None

    amplitude, residual = vertical_excursion(frames, v)
    threshold = max(p.jump_factor * scene.mean, p.min_jump_px)
    if not amplitude > threshold:
        return None
    if abs(v[-1] - v[0]) > p.return_tolerance * amplitude:
        return None

    active = frames[np.abs(residual) > p.jump_span_fraction * amplitude]
    return JumpHit(
        score=1.0 - math.exp(-(amplitude / threshold - 1.0)),
        amplitude=amplitude,
        frame_start=int(active.min()),
        frame_end=int(active.max()),
    )


__all__ = [
    "JumpHit",
    "detect_circular",
    "detect_fast_motion",
    "detect_jump",
    "detect_loitering",
    "fast_threshold",
    "jump_from_arrays",
    "speed_score",
    "trailing_window",
    "vertical_excursion",
]
