"""
Bounding-box arithmetic for the detection front end.
Defines BoundingBox, Observation and Detection, IoU, greedy non-maximum
suppression, and conversion into the Kalman measurement space (u, v, gamma, h).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence
import math

import numpy as np


DESCRIPTOR_DIM = 128


@dataclass(frozen=True)
class BoundingBox:
    """
    Pixel-space box: (x, y) is the top-left corner, w and h the extent.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(value) for value in values):
            raise ValueError(f"Bounding box coordinates must be finite: {values}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(
                f"Bounding box width and height must be positive (w={self.w}, h={self.h})"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)


@dataclass(frozen=True)
class Observation:
    """
    Kalman measurement (u, v, gamma, h): box center, aspect ratio w/h, height.
    """

    u: float
    v: float
    gamma: float
    h: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.h > 0):
            raise ValueError(
                f"Observation requires gamma > 0 and h > 0 (gamma={self.gamma}, h={self.h})"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.gamma, self.h], dtype=np.float64)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Observation":
        return cls(float(values[0]), float(values[1]), float(values[2]), float(values[3]))

    def to_box(self) -> BoundingBox:
        """Inverse of to_observation."""
        w = self.gamma * self.h
        return BoundingBox(self.u - w / 2, self.v - self.h / 2, w, self.h)


@dataclass(frozen=True, eq=False)
class Detection:
    """
    One per-frame person detection.
    descriptor is an optional 128-d unit vector (sidecar, encoder or synthetic).
    """

    frame: int
    box: BoundingBox
    confidence: float
    descriptor: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"Detection frame must be non-negative, got {self.frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(
                f"Detection confidence must lie in [0, 1], got {self.confidence}"
            )
        if self.descriptor is not None:
            if self.descriptor.shape != (DESCRIPTOR_DIM,):
                raise ValueError(
                    f"Descriptor must have {DESCRIPTOR_DIM} values, "
                    f"got shape {self.descriptor.shape}"
                )
            norm = float(np.linalg.norm(self.descriptor))
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"Descriptor must have unit norm, got {norm:.8f}")

    def with_descriptor(self, descriptor: np.ndarray) -> "Detection":
        return Detection(self.frame, self.box, self.confidence, descriptor)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Pairwise IoU between two (n, 4) and (m, 4) arrays of (x, y, w, h) boxes.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ax2 = a[:, 0] + a[:, 2]
    ay2 = a[:, 1] + a[:, 3]
    bx2 = b[:, 0] + b[:, 2]
    by2 = b[:, 1] + b[:, 3]

    inter_w = np.minimum(ax2[:, None], bx2[None, :]) - np.maximum(a[:, 0, None], b[None, :, 0])
    inter_h = np.minimum(ay2[:, None], by2[None, :]) - np.maximum(a[:, 1, None], b[None, :, 1])
    inter = np.clip(inter_w, 0.0, None) * np.clip(inter_h, 0.0, None)

    area_a = a[:, 2] * a[:, 3]
    area_b = b[:, 2] * b[:, 3]
    union = area_a[:, None] + area_b[None, :] - inter
    return inter / union


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    return float(iou_matrix(a.as_array(), b.as_array())[0, 0])


def nms(dets: List[Detection], overlap_threshold: float) -> List[Detection]:
    """
    Greedy confidence-descending suppression.

    Keeps the highest-confidence remaining detection and drops every other
    detection whose IoU with it exceeds overlap_threshold. Equal confidences
    keep input order. The result is confidence-descending.
    """
    if not dets:
        return []
    frames = {det.frame for det in dets}
    if len(frames) > 1:
        raise ValueError(f"nms expects detections from one frame, got frames {sorted(frames)}")

    order = sorted(range(len(dets)), key=lambda idx: (-dets[idx].confidence, idx))
    boxes = np.stack([det.box.as_array() for det in dets])
    overlaps = iou_matrix(boxes, boxes)

    suppressed = np.zeros(len(dets), dtype=bool)
    kept: List[Detection] = []
    for idx in order:
        if suppressed[idx]:
            continue
        kept.append(dets[idx])
        suppressed |= overlaps[idx] > overlap_threshold
    return kept


def to_observation(box: BoundingBox) -> Observation:
    """Convert a pixel box to (u, v, gamma, h) with (u, v) the box center."""
    return Observation(
        u=box.x + box.w / 2,
        v=box.y + box.h / 2,
        gamma=box.w / box.h,
        h=box.h,
    )
