"""
Multi-track rules: gathering and dispersion of four or more people.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from edgewatch.anomaly.events import AnomalyCode, AnomalyEvent
from edgewatch.anomaly.params import AnomalyParams


@dataclass(frozen=True)
class GroupSample:
    """
    Positions of one confirmed track at the start and end of the
    converge_frames window.
    """

    track_id: int
    start: Tuple[float, float]
    end: Tuple[float, float]


def trim_group(points: np.ndarray, radius: float, min_size: int) -> np.ndarray:
    """
    Indices of the largest group found by repeatedly dropping the point
    farthest from the common centroid until every point lies within radius.
    Empty when fewer than min_size points remain.
    """
    members = np.arange(len(points))
    while len(members) >= min_size:
        subset = points[members]
        offsets = subset - subset.mean(axis=0)
        distances = np.hypot(offsets[:, 0], offsets[:, 1])
        farthest = int(np.argmax(distances))
        if distances[farthest] <= radius:
            return members
        members = np.delete(members, farthest)
    return members[:0]


def _converging_group(
    ids: np.ndarray,
    anchor: np.ndarray,
    other: np.ndarray,
    p: AnomalyParams,
) -> Optional[Tuple[Tuple[int, ...], float]]:
    """
    Group that is tight at the anchor time and was spread wider at the other
    time. Each member's distance to the group centroid must shrink by at least
    min_approach going from other to anchor.
    """
    members = trim_group(anchor, p.meet_radius, p.min_group)
    if len(members) == 0:
        return None
    anchor_pts, other_pts = anchor[members], other[members]
    anchor_dist = np.hypot(*(anchor_pts - anchor_pts.mean(axis=0)).T)
    other_dist = np.hypot(*(other_pts - other_pts.mean(axis=0)).T)
    progress = other_dist - anchor_dist
    moving = progress >= p.min_approach
    if int(moving.sum()) < p.min_group:
        return None
    track_ids = tuple(sorted(int(track_id) for track_id in ids[members][moving]))
    mean_progress = float(progress[moving].mean())
    return track_ids, mean_progress / (mean_progress + p.min_approach)


def _arrays(samples: Sequence[GroupSample]):
    ids = np.array([s.track_id for s in samples], dtype=np.int64)
    start = np.array([s.start for s in samples], dtype=np.float64).reshape(-1, 2)
    end = np.array([s.end for s in samples], dtype=np.float64).reshape(-1, 2)
    return ids, start, end


def detect_gathering(
    samples: Sequence[GroupSample], frame: int, p: AnomalyParams
) -> Optional[AnomalyEvent]:
    """Fires when min_group or more tracks converge on a common meet point."""
    if len(samples) < p.min_group:
        return None
    ids, start, end = _arrays(samples)
    found = _converging_group(ids, end, start, p)
    if found is None:
        return None
    track_ids, score = found
    return AnomalyEvent(AnomalyCode.GATHER, track_ids, frame, frame, score)


def detect_dispersion(
    samples: Sequence[GroupSample], frame: int, p: AnomalyParams
) -> Optional[AnomalyEvent]:
    """Fires when min_group or more tracks spread out from a common origin."""
    if len(samples) < p.min_group:
        return None
    ids, start, end = _arrays(samples)
    found = _converging_group(ids, start, end, p)
    if found is None:
        return None
    track_ids, score = found
    return AnomalyEvent(AnomalyCode.DISPERSE, track_ids, frame, frame, score)


__all__ = ["GroupSample", "detect_dispersion", "detect_gathering", "trim_group"]
