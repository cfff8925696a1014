"""
Motion statistics over a trajectory window.

A window is a sequence of (frame, Observation) samples, or equivalently a
frames array and an (n, 2) array of box centers.
"""

from dataclasses import dataclass, astuple
from typing import Sequence, Tuple
import math

import numpy as np

from edgewatch.geometry import Observation


class WindowTooShortError(ValueError):
    """Raised when a window has fewer than two samples."""


@dataclass(frozen=True)
class MotionFeatures:
    mean_speed: float
    speed_std: float
    net_displacement: float
    path_length: float
    winding: float
    vertical_amplitude: float
    confinement_radius: float
    window_len: int

    def as_tuple(self) -> Tuple[float, ...]:
        return astuple(self)


def window_arrays(window: Sequence[Tuple[int, Observation]]) -> Tuple[np.ndarray, np.ndarray]:
    """Split (frame, Observation) samples into frames and (u, v) arrays."""
    frames = np.fromiter((frame for frame, _ in window), dtype=np.int64, count=len(window))
    points = np.array([(obs.u, obs.v) for _, obs in window], dtype=np.float64).reshape(-1, 2)
    return frames, points


def motion_features(
    window: Sequence[Tuple[int, Observation]], heading_step: float = 4.0
) -> MotionFeatures:
    frames, points = window_arrays(window)
    return features_from_arrays(frames, points, heading_step)


def features_from_arrays(
    frames: np.ndarray,
    points: np.ndarray,
    heading_step: float = 4.0,
) -> MotionFeatures:
    if len(frames) < 2:
        raise WindowTooShortError(f"Window needs at least 2 samples, got {len(frames)}")
    gaps = np.diff(frames)
    if np.any(gaps <= 0):
        raise ValueError("Window frames must be strictly increasing")

    steps = np.diff(points, axis=0)
    step_lengths = np.hypot(steps[:, 0], steps[:, 1])
    speeds = step_lengths / gaps
    path_length = float(step_lengths.sum())
    net = points[-1] - points[0]
    net_displacement = min(float(math.hypot(net[0], net[1])), path_length)

    centroid = points.mean(axis=0)
    offsets = points - centroid
    confinement = float(np.sqrt((offsets * offsets).sum(axis=1)).max())

    return MotionFeatures(
        mean_speed=float(speeds.mean()),
        speed_std=float(speeds.std()),
        net_displacement=net_displacement,
        path_length=path_length,
        winding=heading_winding(points, heading_step),
        vertical_amplitude=float(points[:, 1].max() - points[:, 1].min()),
        confinement_radius=confinement,
        window_len=int(frames[-1] - frames[0] + 1),
    )


def heading_winding(points: np.ndarray, min_step: float = 4.0) -> float:
    """
    Signed sum of heading changes between consecutive displacements, in radians.

    Displacements shorter than min_step carry no reliable heading and are
    merged into the following ones, so jitter on a standing person adds no
    turning. Each change is wrapped to (-pi, pi]. A path that ends within one
    step of its start is a closed loop and also turns through its closing step,
    which makes a full loop count exactly 2*pi.
    """
    chords = _displacements(points, min_step)
    if len(chords) < 2:
        return 0.0
    headings = np.arctan2(chords[:, 1], chords[:, 0])
    winding = float(wrap_angle(np.diff(headings)).sum())
    if len(chords) < 3:
        return winding

    gap = points[0] - points[-1]
    gap_length = math.hypot(gap[0], gap[1])
    lengths = np.hypot(chords[:, 0], chords[:, 1])
    if gap_length > max(min_step, 1.5 * float(lengths.mean())):
        return winding
    if gap_length >= min_step:
        closing = math.atan2(gap[1], gap[0])
        turns = np.array([closing - headings[-1], headings[0] - closing])
    else:
        turns = np.array([headings[0] - headings[-1]])
    return winding + float(wrap_angle(turns).sum())


def _displacements(points: np.ndarray, min_step: float) -> np.ndarray:
    """Consecutive displacements, each at least min_step long."""
    chords = []
    anchor = points[0]
    for point in points[1:]:
        chord = point - anchor
        if math.hypot(chord[0], chord[1]) >= min_step:
            chords.append(chord)
            anchor = point
    return np.array(chords, dtype=np.float64).reshape(-1, 2)


def wrap_angle(angles: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    wrapped = np.mod(angles + np.pi, 2 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def mean_recent_speed(frames: np.ndarray, points: np.ndarray, steps: int) -> float:
    """Mean speed over the last `steps` steps of a window."""
    frames = frames[-(steps + 1):]
    points = points[-(steps + 1):]
    deltas = np.diff(points, axis=0)
    return float((np.hypot(deltas[:, 0], deltas[:, 1]) / np.diff(frames)).mean())


__all__ = [
    "MotionFeatures",
    "WindowTooShortError",
    "features_from_arrays",
    "heading_winding",
    "mean_recent_speed",
    "motion_features",
    "window_arrays",
    "wrap_angle",
]
