"""
Wall-clock benchmark of the pipeline stages.

Each frame is timed in four stages: ingest (pulling the frame and NMS),
associate (tracker step), anomaly (rules and templates) and alert
(encoding and dispatch). Peak resident memory is sampled with psutil.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union
import time

import numpy as np
import psutil
import yaml

from edgewatch.alerting.sinks import AlertSink
from edgewatch.appearance.encoders import EncoderSpec, build_encoder
from edgewatch.config import PipelineConfig
from edgewatch.evaluation.timing import TimingModel, predict_time
from edgewatch.ingestion.detections import FrameDetections
from edgewatch.pipeline import Pipeline


STAGES = ("ingest", "associate", "anomaly", "alert")
RSS_INTERVAL = 50


@dataclass(frozen=True)
class StageStats:
    mean_ms: float = 0.0
    p95_ms: float = 0.0

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "StageStats":
        if samples.size == 0:
            return cls()
        return cls(float(samples.mean()), float(np.percentile(samples, 95)))


@dataclass
class BenchReport:
    frames: int
    detections: int
    stages: Dict[str, StageStats]
    frame: StageStats
    fps: float
    peak_rss_mb: float
    encode_ms_per_detection: float
    samples: np.ndarray = field(default_factory=lambda: np.zeros((0, len(STAGES))), repr=False)

    @property
    def tracking_mean_ms(self) -> float:
        """Association plus anomaly cost per frame."""
        return self.stages["associate"].mean_ms + self.stages["anomaly"].mean_ms

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frames": self.frames,
            "detections": self.detections,
            "stages": {
                name: {"mean_ms": round(stats.mean_ms, 4), "p95_ms": round(stats.p95_ms, 4)}
                for name, stats in self.stages.items()
            },
            "frame": {"mean_ms": round(self.frame.mean_ms, 4), "p95_ms": round(self.frame.p95_ms, 4)},
            "tracking_mean_ms": round(self.tracking_mean_ms, 4),
            "fps": round(self.fps, 2),
            "peak_rss_mb": round(self.peak_rss_mb, 1),
            "encode_ms_per_detection": round(self.encode_ms_per_detection, 4),
        }

    def write_yaml(self, path: Union[str, Path]) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            yaml.safe_dump(self.to_dict(), handle, sort_keys=False)

    def summary_lines(self) -> List[str]:
        lines = [f"Frames: {self.frames}  Detections: {self.detections}"]
        for name, stats in self.stages.items():
            lines.append(f"  {name:<10} mean {stats.mean_ms:8.4f} ms  p95 {stats.p95_ms:8.4f} ms")
        lines.append(f"  {'frame':<10} mean {self.frame.mean_ms:8.4f} ms  p95 {self.frame.p95_ms:8.4f} ms")
        lines.append(f"Effective FPS: {self.fps:.2f}")
        lines.append(f"Peak RSS: {self.peak_rss_mb:.1f} MB")
        return lines


def measure_encoder(spec: EncoderSpec, repeats: int = 50, seed: int = 0) -> float:
    """Mean milliseconds to encode one patch at twice the encoder input size."""
    if repeats <= 0:
        return 0.0
    encoder = build_encoder(spec)
    height, width = spec.input_size
    patch = np.random.default_rng(seed).integers(0, 256, (2 * height, 2 * width, 3), dtype=np.uint8)
    start = time.perf_counter()
    for _ in range(repeats):
        encoder.encode(patch)
    return (time.perf_counter() - start) * 1000.0 / repeats


def bench(
    config: PipelineConfig,
    frames: Iterable[FrameDetections],
    sinks: Sequence[AlertSink] = (),
    encoder_repeats: int = 50,
) -> BenchReport:
    pipeline = Pipeline(config, sinks, retain=False)
    process = psutil.Process()
    peak_rss = process.memory_info().rss
    iterator = iter(frames)
    samples = []
    detections = 0
    clock = time.perf_counter

    while True:
        t0 = clock()
        try:
            frame, dets = next(iterator)
        except StopIteration:
            break
        dets = pipeline.filter(dets)
        t1 = clock()
        result = pipeline.associate(frame, dets)
        t2 = clock()
        opened = pipeline.detect(result)
        t3 = clock()
        pipeline.alert(opened)
        t4 = clock()
        samples.append((t1 - t0, t2 - t1, t3 - t2, t4 - t3))
        detections += len(dets)
        if len(samples) % RSS_INTERVAL == 0:
            peak_rss = max(peak_rss, process.memory_info().rss)
    peak_rss = max(peak_rss, process.memory_info().rss)
    pipeline.close()

    timings = np.array(samples, dtype=np.float64).reshape(-1, len(STAGES)) * 1000.0
    per_frame = timings.sum(axis=1)
    frame_stats = StageStats.from_samples(per_frame)
    return BenchReport(
        frames=len(samples),
        detections=detections,
        stages={name: StageStats.from_samples(timings[:, i]) for i, name in enumerate(STAGES)},
        frame=frame_stats,
        fps=1000.0 / frame_stats.mean_ms if frame_stats.mean_ms > 0 else 0.0,
        peak_rss_mb=peak_rss / (1024 * 1024),
        encode_ms_per_detection=measure_encoder(config.encoder, encoder_repeats, config.seed),
        samples=timings,
    )


def prediction_lines(model: TimingModel, counts: Iterable[int]) -> List[str]:
    lines = []
    for d_k in counts:
        tau, fps = predict_time(model, d_k)
        lines.append(f"d_k={d_k}: tau = {tau:.0f} ms, FPS = {fps:.2f}")
    return lines


__all__ = [
    "BenchReport",
    "STAGES",
    "StageStats",
    "bench",
    "measure_encoder",
    "prediction_lines",
]
