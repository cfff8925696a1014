"""
Anomaly classes, events, event consolidation and per-frame scoring.
"""

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Dict, Iterable, List, Optional, Tuple
import logging

import numpy as np


logger = logging.getLogger(__name__)


class AnomalyCode(IntEnum):
    LOITER = 0
    FAST = 1
    CIRCULAR = 2
    JUMP = 3
    GATHER = 4
    DISPERSE = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "AnomalyCode":
        if isinstance(value, str) and not value.isdigit():
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(
                    f"Unknown anomaly class '{value}'. Supported: "
                    f"{', '.join(code.label for code in cls)}"
                ) from None
        return cls(int(value))


GROUP_CODES = (AnomalyCode.GATHER, AnomalyCode.DISPERSE)
MIN_GROUP_SIZE = 4


@dataclass(frozen=True)
class AnomalyEvent:
    """
    One anomaly over an inclusive frame span. Per-frame rule hits and
    consolidated log entries share this type.
    """

    code: AnomalyCode
    track_ids: Tuple[int, ...]
    frame_start: int
    frame_end: int
    score: float
    source: str = "rule"

    def __post_init__(self):
        if self.frame_end < self.frame_start:
            raise ValueError(
                f"Event ends before it starts ({self.frame_start}..{self.frame_end})"
            )
        if not self.track_ids:
            raise ValueError("Event requires at least one track id")
        if self.code in GROUP_CODES and len(self.track_ids) < MIN_GROUP_SIZE:
            raise ValueError(
                f"{self.code.label} events need {MIN_GROUP_SIZE} or more tracks, "
                f"got {len(self.track_ids)}"
            )
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"Event score must lie in [0, 1], got {self.score}")

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return int(self.code), self.track_ids

    def covers(self, frame: int) -> bool:
        return self.frame_start <= frame <= self.frame_end

    def to_row(self) -> Dict[str, object]:
        return {
            "frame_start": self.frame_start,
            "frame_end": self.frame_end,
            "code": int(self.code),
            "score": round(self.score, 6),
            "track_ids": ";".join(str(track_id) for track_id in self.track_ids),
        }


def frame_regularity_score(events: Iterable[AnomalyEvent]) -> float:
    """Max score over the events active at a frame; 0.0 when there are none."""
    return max((event.score for event in events), default=0.0)


class ScoreBoard:
    """
    Running per-frame maximum of hit scores, overall and per anomaly class.
    """

    def __init__(self):
        self._overall: Dict[int, float] = {}
        self._by_code: Dict[int, Dict[int, float]] = {code: {} for code in AnomalyCode}

    def add(self, event: AnomalyEvent) -> None:
        per_code = self._by_code[int(event.code)]
        for frame in range(event.frame_start, event.frame_end + 1):
            if event.score > self._overall.get(frame, 0.0):
                self._overall[frame] = event.score
            if event.score > per_code.get(frame, 0.0):
                per_code[frame] = event.score

    def score(self, frame: int, code: Optional[AnomalyCode] = None) -> float:
        table = self._overall if code is None else self._by_code[int(code)]
        return table.get(frame, 0.0)

    def series(
        self, first: int, last: int, code: Optional[AnomalyCode] = None
    ) -> np.ndarray:
        """Scores for frames first..last inclusive."""
        table = self._overall if code is None else self._by_code[int(code)]
        return np.array(
            [table.get(frame, 0.0) for frame in range(first, last + 1)],
            dtype=np.float64,
        )

    def pop(self, frame: int) -> Tuple[float, ...]:
        """
        Remove a frame that no later hit can reach. Returns its overall
        score followed by one score per anomaly class.
        """
        row = [self._overall.pop(frame, 0.0)]
        row.extend(self._by_code[int(code)].pop(frame, 0.0) for code in AnomalyCode)
        return tuple(row)

    def __len__(self) -> int:
        return len(self._overall)


class EventLog:
    """
    Consolidates per-frame hits into logged events.

    Hits with the same class and track set merge while they keep arriving
    within merge_gap frames of the open event's end.
    """

    def __init__(self, merge_gap: int = 5):
        self.merge_gap = merge_gap
        self._open: Dict[Tuple[int, Tuple[int, ...]], AnomalyEvent] = {}
        self._closed: List[AnomalyEvent] = []

    def add(self, hit: AnomalyEvent) -> Optional[AnomalyEvent]:
        """Merge a hit. Returns the event when the hit opened a new one."""
        current = self._open.get(hit.key)
        if current is not None and hit.frame_start <= current.frame_end + self.merge_gap:
            self._open[hit.key] = replace(
                current,
                frame_start=min(current.frame_start, hit.frame_start),
                frame_end=max(current.frame_end, hit.frame_end),
                score=max(current.score, hit.score),
            )
            return None
        if current is not None:
            self._closed.append(current)
        self._open[hit.key] = hit
        logger.debug(
            "Opened %s event for tracks %s at frame %d",
            hit.code.label,
            list(hit.track_ids),
            hit.frame_start,
        )
        return hit

    def close_stale(self, frame: int) -> None:
        """Close open events that can no longer merge with hits at frame."""
        stale = [
            key for key, event in self._open.items()
            if event.frame_end + self.merge_gap < frame
        ]
        for key in stale:
            self._closed.append(self._open.pop(key))

    def close_all(self) -> None:
        self._closed.extend(self._open.values())
        self._open.clear()

    def drain(self) -> List[AnomalyEvent]:
        """Hand over the events closed since the last drain."""
        closed, self._closed = self._closed, []
        return closed

    @property
    def events(self) -> List[AnomalyEvent]:
        """Undrained closed and open events ordered by (frame_start, code, track_ids)."""
        merged = self._closed + list(self._open.values())
        return sorted(merged, key=lambda e: (e.frame_start, int(e.code), e.track_ids))


__all__ = [
    "AnomalyCode",
    "AnomalyEvent",
    "EventLog",
    "GROUP_CODES",
    "MIN_GROUP_SIZE",
    "ScoreBoard",
    "frame_regularity_score",
]
