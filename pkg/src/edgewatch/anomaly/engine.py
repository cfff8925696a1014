"""
Per-stream anomaly engine.

Consumes tracker FrameResults in frame order, keeps a trajectory buffer for
every confirmed track, evaluates the rules and the optional template path,
and feeds hits into the score board and the event log.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from edgewatch.anomaly.events import AnomalyCode, AnomalyEvent, EventLog, ScoreBoard
from edgewatch.anomaly.features import features_from_arrays, mean_recent_speed
from edgewatch.anomaly.groups import GroupSample, detect_dispersion, detect_gathering
from edgewatch.anomaly.params import AnomalyParams
from edgewatch.anomaly.rules import (
    detect_circular,
    detect_loitering,
    jump_from_arrays,
    speed_score,
    trailing_window,
    vertical_excursion,
)
from edgewatch.anomaly.scene import SceneStats
from edgewatch.anomaly.templates import AnomalyTemplate, TemplateMatcher, feature_vector
from edgewatch.association import FrameResult


class TrackBuffer:
    """
    Append-only (frame, u, v) samples of one track, trimmed to the most
    recent `keep` samples.
    """

    def __init__(self, keep: int, capacity: int = 64):
        self.keep = keep
        self._frames = np.zeros(capacity, dtype=np.int64)
        self._points = np.zeros((capacity, 2), dtype=np.float64)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def append(self, frame: int, u: float, v: float) -> None:
        if self._size == len(self._frames):
            if self._size >= 2 * self.keep:
                tail = self._size - self.keep
                self._frames[: self.keep] = self._frames[tail: self._size]
                self._points[: self.keep] = self._points[tail: self._size]
                self._size = self.keep
            else:
                self._frames = np.resize(self._frames, 2 * self._size)
                self._points = np.resize(self._points, (2 * self._size, 2))
        self._frames[self._size] = frame
        self._points[self._size] = (u, v)
        self._size += 1

    @property
    def frames(self) -> np.ndarray:
        return self._frames[: self._size]

    @property
    def points(self) -> np.ndarray:
        return self._points[: self._size]

    @property
    def last_frame(self) -> Optional[int]:
        return int(self._frames[self._size - 1]) if self._size else None

    def position_at(self, frame: int, max_gap: int) -> Optional[np.ndarray]:
        """Latest position at or before frame, if no older than max_gap frames."""
        index = int(np.searchsorted(self.frames, frame, side="right")) - 1
        if index < 0 or frame - self._frames[index] > max_gap:
            return None
        return self._points[index]


class AnomalyEngine:
    def __init__(
        self,
        params: Optional[AnomalyParams] = None,
        templates: Sequence[AnomalyTemplate] = (),
        retain: bool = True,
    ):
        """
        With retain=False the engine keeps no history: closed events are only
        handed out through `closed` and settled frame scores are dropped.
        """
        self.params = params or AnomalyParams()
        self.templates = list(templates) if self.params.templates_enabled else []
        self.speed_stats = SceneStats()
        self.jump_stats = SceneStats()
        self.scores = ScoreBoard()
        self.log = EventLog(self.params.merge_gap)
        self.retain = retain
        self.closed: List[AnomalyEvent] = []
        self.events_opened = 0
        self._logged: List[AnomalyEvent] = []
        self._settled_rows: List[Tuple[float, ...]] = []
        self._unsettled: Optional[int] = None
        self.first_frame: Optional[int] = None
        self.last_frame: Optional[int] = None
        self._buffers: Dict[int, TrackBuffer] = {}
        self._matchers: Dict[int, List[TemplateMatcher]] = {}
        self._pushed: Dict[int, List[int]] = {}
        p = self.params
        self._keep = max(
            p.still_frames, p.circle_window, p.jump_window,
            p.speed_window + 1, p.converge_frames + p.max_sample_gap + 1,
            p.template_window,
        ) + 1

    def process(self, result: FrameResult) -> List[AnomalyEvent]:
        """
        Consume one frame. Returns the events this frame opened in the log,
        which are the ones to alert on.
        """
        frame = result.frame
        if self.first_frame is None:
            self.first_frame = frame
        self.last_frame = frame
        p = self.params

        live = set()
        matched: List[int] = []
        for snapshot in result.active_tracks:
            live.add(snapshot.track_id)
            if snapshot.measurement is None:
                continue
            buffer = self._buffers.get(snapshot.track_id)
            if buffer is None:
                buffer = self._buffers[snapshot.track_id] = TrackBuffer(self._keep)
            buffer.append(frame, snapshot.measurement.u, snapshot.measurement.v)
            matched.append(snapshot.track_id)
        for track_id in [tid for tid in self._buffers if tid not in live]:
            del self._buffers[track_id]
            self._matchers.pop(track_id, None)
            self._pushed.pop(track_id, None)

        hits: List[AnomalyEvent] = []
        quiet_speeds: List[float] = []
        quiet_jumps: List[float] = []
        for track_id in matched:
            buffer = self._buffers[track_id]
            if len(buffer) < 2:
                continue
            if p.rules_enabled:
                hits.extend(
                    self._single_track(track_id, buffer, frame, quiet_speeds, quiet_jumps)
                )
            if self.templates:
                hits.extend(self._template_hits(track_id, buffer, frame))

        self.speed_stats.add_batch(np.array(quiet_speeds))
        self.jump_stats.add_batch(np.array(quiet_jumps))

        if p.rules_enabled and frame % p.eval_stride == 0:
            hits.extend(self._group_hits(frame))

        opened: List[AnomalyEvent] = []
        self.log.close_stale(frame)
        for hit in hits:
            self.scores.add(hit)
            event = self.log.add(hit)
            if event is not None:
                opened.append(event)
        self.events_opened += len(opened)
        self._hand_over()
        self._settle(self._horizon(frame) - 1)
        return opened

    def finish(self) -> List[AnomalyEvent]:
        """Close every open event at end of stream; returns the events closed."""
        self.log.close_all()
        self._hand_over()
        return self.closed

    def _hand_over(self) -> None:
        self.closed = self.log.drain()
        if self.retain:
            self._logged.extend(self.closed)

    def _horizon(self, frame: int) -> int:
        """Earliest frame a future hit can still cover."""
        oldest = [int(buffer.frames[0]) for buffer in self._buffers.values() if len(buffer)]
        oldest.extend(pushed[0] for pushed in self._pushed.values() if pushed)
        return min(oldest, default=frame)

    def _settle(self, through: int) -> None:
        if self._unsettled is None:
            self._unsettled = self.first_frame
        for frame in range(self._unsettled, through + 1):
            row = self.scores.pop(frame)
            if self.retain:
                self._settled_rows.append(row)
        self._unsettled = max(self._unsettled, through + 1)

    def _single_track(self, track_id, buffer, frame, quiet_speeds, quiet_jumps):
        p = self.params
        frames, points = buffer.frames, buffer.points
        ids = (track_id,)
        hits = []

        window = trailing_window(frames, p.still_frames)
        if frames.size - window.start >= 2:
            features = features_from_arrays(frames[window], points[window], p.heading_step)
            score = detect_loitering(features, p)
            if score is not None:
                hits.append(AnomalyEvent(AnomalyCode.LOITER, ids, frame, frame, score))

        if len(frames) > p.speed_window:
            speed = mean_recent_speed(frames, points, p.speed_window)
            score = speed_score(speed, self.speed_stats, p)
            if score is None:
                quiet_speeds.append(speed)
            else:
                hits.append(AnomalyEvent(AnomalyCode.FAST, ids, frame, frame, score))

        window = trailing_window(frames, p.circle_window)
        if frames.size - window.start >= 3:
            features = features_from_arrays(frames[window], points[window], p.heading_step)
            score = detect_circular(features, p)
            if score is not None:
                hits.append(AnomalyEvent(AnomalyCode.CIRCULAR, ids, frame, frame, score))

        window = trailing_window(frames, p.jump_window)
        if frames.size - window.start >= 3:
            jump = jump_from_arrays(frames, points[:, 1], self.jump_stats, p)
            if jump is None:
                amplitude, _ = vertical_excursion(frames[window], points[window, 1])
                quiet_jumps.append(amplitude)
            else:
                hits.append(
                    AnomalyEvent(
                        AnomalyCode.JUMP, ids, jump.frame_start, jump.frame_end, jump.score
                    )
                )
        return hits

    def _template_hits(self, track_id, buffer, frame):
        p = self.params
        frames, points = buffer.frames, buffer.points
        window = trailing_window(frames, p.template_window)
        if frames.size - window.start < 2:
            return []
        vector = feature_vector(
            features_from_arrays(frames[window], points[window], p.heading_step)
        )
        matchers = self._matchers.get(track_id)
        if matchers is None:
            matchers = self._matchers[track_id] = [
                TemplateMatcher(template) for template in self.templates
            ]
            self._pushed[track_id] = []
        pushed = self._pushed[track_id]
        pushed.append(frame)

        hits = []
        for matcher in matchers:
            completed = matcher.push(vector)
            if completed is None:
                continue
            shift, theta = completed
            score = theta / matcher.template.length
            if score >= p.template_threshold:
                start = pushed[shift - len(matcher) + len(pushed)]
                hits.append(
                    AnomalyEvent(
                        matcher.template.code, (track_id,), start, frame,
                        min(score, 1.0), source="template",
                    )
                )
        longest = max(m.template.length for m in matchers)
        if len(pushed) > longest:
            del pushed[: len(pushed) - longest]
        return hits

    def _group_hits(self, frame: int) -> List[AnomalyEvent]:
        p = self.params
        samples = []
        for track_id, buffer in self._buffers.items():
            end = buffer.position_at(frame, p.max_sample_gap)
            start = buffer.position_at(frame - p.converge_frames, p.max_sample_gap)
            if end is None or start is None:
                continue
            samples.append(
                GroupSample(track_id, (start[0], start[1]), (end[0], end[1]))
            )
        if len(samples) < p.min_group:
            return []
        samples.sort(key=lambda sample: sample.track_id)
        held = frame + p.eval_stride - 1
        hits = []
        for detect in (detect_gathering, detect_dispersion):
            event = detect(samples, frame, p)
            if event is not None:
                hits.append(
                    AnomalyEvent(event.code, event.track_ids, frame, held, event.score)
                )
        return hits

    @property
    def events(self) -> List[AnomalyEvent]:
        """Logged events so far; without retain only the ones still open."""
        merged = self._logged + self.log.events
        return sorted(merged, key=lambda e: (e.frame_start, int(e.code), e.track_ids))

    def frame_scores(self, code: Optional[AnomalyCode] = None) -> np.ndarray:
        """Regularity scores from the first to the last processed frame."""
        if self.first_frame is None or self.last_frame is None:
            return np.zeros(0)
        if not self.retain:
            raise ValueError("Frame scores are only kept by an engine built with retain=True")
        column = 0 if code is None else 1 + int(code)
        settled = np.array([row[column] for row in self._settled_rows], dtype=np.float64)
        start = self.first_frame if self._unsettled is None else self._unsettled
        return np.concatenate([settled, self.scores.series(start, self.last_frame, code)])


__all__ = ["AnomalyEngine", "TrackBuffer"]
