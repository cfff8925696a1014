"""
End-to-end pipeline: detections -> NMS -> tracker -> anomaly engine -> alerts.

One Pipeline instance owns one stream. Stages are exposed separately so the
bench can time them; run() chains them over a whole stream.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union
import logging
import sys

import numpy as np
import pandas as pd

from edgewatch.alerting.sinks import AlertSink, DeliveryReport, alert_for_event, dispatch
from edgewatch.anomaly.engine import AnomalyEngine
from edgewatch.anomaly.events import AnomalyCode, AnomalyEvent
from edgewatch.anomaly.templates import AnomalyTemplate, builtin_templates, load_templates
from edgewatch.association import FrameResult, Tracker
from edgewatch.config import STDIN, PipelineConfig
from edgewatch.geometry import Detection, nms
from edgewatch.ingestion.builtin import load_scenario_spec
from edgewatch.ingestion.descriptors import attach_descriptors, parse_descriptors
from edgewatch.ingestion.detections import (
    FrameDetections,
    fill_gaps,
    parse_detections,
    stream_detections,
)
from edgewatch.ingestion.scenarios import Scenario, generate_scenario


logger = logging.getLogger(__name__)

TRACK_LOG_COLUMNS = ["frame", "track_id", "x", "y", "w", "h", "status"]
EVENT_LOG_COLUMNS = ["frame_start", "frame_end", "code", "score", "track_ids"]


@dataclass
class FrameOutcome:
    result: FrameResult
    opened: List[AnomalyEvent] = field(default_factory=list)
    deliveries: List[DeliveryReport] = field(default_factory=list)


@dataclass
class RunSummary:
    frames: int
    event_count: int
    alerts: int
    failed_deliveries: int
    scores: np.ndarray
    first_frame: Optional[int] = None


class RunLogWriter:
    """
    Appends track and event rows to their CSV logs every flush_frames frames.

    Both files are truncated to a header on construction. Events are written
    once they close, ordered by (frame_start, code, track_ids) within a chunk.
    """

    def __init__(
        self,
        track_path: Union[str, Path],
        event_path: Union[str, Path],
        flush_frames: int = 50,
    ):
        self.track_path = Path(track_path)
        self.event_path = Path(event_path)
        self.flush_frames = flush_frames
        self.tracks_written = 0
        self.events_written = 0
        self._tracks: List[Tuple] = []
        self._events: List[AnomalyEvent] = []
        self._frames = 0
        for path, columns in (
            (self.track_path, TRACK_LOG_COLUMNS),
            (self.event_path, EVENT_LOG_COLUMNS),
        ):
            path.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(columns=columns).to_csv(path, index=False, lineterminator="\n")

    @property
    def pending(self) -> int:
        """Rows held in memory and not yet written."""
        return len(self._tracks) + len(self._events)

    def add_tracks(self, rows: Iterable[Tuple]) -> None:
        self._tracks.extend(rows)

    def add_events(self, events: Iterable[AnomalyEvent]) -> None:
        self._events.extend(events)

    def end_frame(self) -> None:
        self._frames += 1
        if self._frames >= self.flush_frames:
            self.flush()

    def flush(self) -> None:
        if self._tracks:
            pd.DataFrame(self._tracks, columns=TRACK_LOG_COLUMNS).to_csv(
                self.track_path, mode="a", header=False, index=False,
                float_format="%.3f", lineterminator="\n",
            )
            self.tracks_written += len(self._tracks)
        if self._events:
            self._events.sort(key=lambda e: (e.frame_start, int(e.code), e.track_ids))
            pd.DataFrame(
                [event.to_row() for event in self._events], columns=EVENT_LOG_COLUMNS
            ).to_csv(
                self.event_path, mode="a", header=False, index=False,
                float_format="%.6f", lineterminator="\n",
            )
            self.events_written += len(self._events)
        self._tracks = []
        self._events = []
        self._frames = 0


def resolve_templates(config: PipelineConfig) -> List[AnomalyTemplate]:
    if not config.anomaly.templates_enabled:
        return []
    templates = builtin_templates(config.anomaly)
    if config.input.templates:
        templates.extend(load_templates(config.input.templates))
    return templates


class Pipeline:
    """
    Without a writer the engine retains events and frame scores for
    evaluation. With one, rows go to disk as they settle and nothing grows
    with stream length.
    """

    def __init__(
        self,
        config: PipelineConfig,
        sinks: Sequence[AlertSink] = (),
        templates: Optional[Sequence[AnomalyTemplate]] = None,
        writer: Optional[RunLogWriter] = None,
        retain: Optional[bool] = None,
    ):
        self.config = config
        self.tracker = Tracker(config.association, config.motion)
        if templates is None:
            templates = resolve_templates(config)
        if retain is None:
            retain = writer is None
        self.engine = AnomalyEngine(config.anomaly, templates, retain=retain)
        self.sinks = list(sinks)
        self.writer = writer
        self.alerts_sent = 0
        self.failed_deliveries = 0
        self.frames_processed = 0

    def filter(self, dets: Sequence[Detection]) -> List[Detection]:
        return nms(list(dets), self.config.input.nms_overlap)

    def associate(self, frame: int, dets: Sequence[Detection]) -> FrameResult:
        result = self.tracker.step(frame, dets)
        if self.writer is not None:
            self.writer.add_tracks(
                (
                    frame, snapshot.track_id,
                    snapshot.box.x, snapshot.box.y, snapshot.box.w, snapshot.box.h,
                    "matched" if snapshot.matched else "predicted",
                )
                for snapshot in result.active_tracks
            )
        self.frames_processed += 1
        return result

    def detect(self, result: FrameResult) -> List[AnomalyEvent]:
        opened = self.engine.process(result)
        if self.writer is not None:
            self.writer.add_events(self.engine.closed)
            self.writer.end_frame()
        return opened

    def alert(self, opened: Sequence[AnomalyEvent]) -> List[DeliveryReport]:
        reports = []
        if not self.sinks:
            return reports
        for event in opened:
            report = dispatch(alert_for_event(event, self.config.alerting), self.sinks)
            reports.append(report)
        self.alerts_sent += len(reports)
        self.failed_deliveries += sum(1 for report in reports if not report.ok)
        return reports

    def step(self, frame: int, dets: Sequence[Detection]) -> FrameOutcome:
        result = self.associate(frame, self.filter(dets))
        opened = self.detect(result)
        return FrameOutcome(result, opened, self.alert(opened))

    def run(self, stream: Iterable[FrameDetections]) -> RunSummary:
        for frame, dets in stream:
            self.step(frame, dets)
        return self.summary()

    def summary(self) -> RunSummary:
        return RunSummary(
            frames=self.frames_processed,
            event_count=self.engine.events_opened,
            alerts=self.alerts_sent,
            failed_deliveries=self.failed_deliveries,
            scores=self.frame_scores() if self.engine.retain else np.zeros(0),
            first_frame=self.engine.first_frame,
        )

    @property
    def events(self) -> List[AnomalyEvent]:
        return self.engine.events

    def frame_scores(self, code: Optional[AnomalyCode] = None) -> np.ndarray:
        return self.engine.frame_scores(code)

    def close(self) -> None:
        """End the stream: close open events, write what is left, close sinks."""
        closed = self.engine.finish()
        if self.writer is not None:
            self.writer.add_events(closed)
            self.writer.flush()
        for sink in self.sinks:
            sink.close()


def load_scenario(config: PipelineConfig) -> Scenario:
    spec = load_scenario_spec(config.input.scenario)
    return generate_scenario(spec, seed=config.seed)


def open_frames(
    config: PipelineConfig, stdin=None
) -> Tuple[Iterator[FrameDetections], Optional[Scenario]]:
    """
    Resolve the configured input into a gap-free frame stream. Returns the
    scenario too when frames are synthetic so callers can read its labels.
    """
    source = config.input
    if source.scenario:
        scenario = load_scenario(config)
        return fill_gaps(scenario.frames), scenario

    descriptors = parse_descriptors(source.descriptors)
    if source.detections == STDIN:
        frames: Iterable[FrameDetections] = stream_detections(
            stdin if stdin is not None else sys.stdin, chunksize=source.chunksize
        )
    else:
        frames = parse_detections(source.detections)
    logger.debug("Loaded %d descriptors from %s", len(descriptors), source.descriptors)
    return fill_gaps(attach_descriptors(frames, descriptors)), None


__all__ = [
    "EVENT_LOG_COLUMNS",
    "FrameOutcome",
    "Pipeline",
    "RunLogWriter",
    "RunSummary",
    "TRACK_LOG_COLUMNS",
    "load_scenario",
    "open_frames",
    "resolve_templates",
]
