"""Tests for boxes, IoU and non-maximum suppression."""

import math

import numpy as np
import pytest

from edgewatch.geometry import (
    BoundingBox,
    Detection,
    Observation,
    iou,
    iou_matrix,
    nms,
    to_observation,
)


def _pair_iou(a, b):
    ix = max(0.0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
    inter = ix * iy
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


def _nms_oracle(boxes, confidences, threshold):
    """Keep i iff no kept box of higher priority overlaps it above threshold."""
    n = len(boxes)
    priority = sorted(range(n), key=lambda i: (-confidences[i], i))
    kept = []
    for i in priority:
        if all(_pair_iou(boxes[i], boxes[j]) <= threshold for j in kept):
            kept.append(i)
    return kept


def test_box_rejects_non_positive_extent():
    with pytest.raises(ValueError):
        BoundingBox(10, 20, -5, 60)
    with pytest.raises(ValueError):
        BoundingBox(10, 20, 30, 0)


def test_box_rejects_non_finite():
    with pytest.raises(ValueError):
        BoundingBox(float("nan"), 0, 1, 1)


def test_iou_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == pytest.approx(1.0)
    assert iou(a, BoundingBox(20, 20, 5, 5)) == 0.0
    assert iou(a, BoundingBox(5, 0, 10, 10)) == pytest.approx(50 / 150)


def test_iou_matrix_is_symmetric_and_bounded():
    rng = np.random.default_rng(3)
    boxes = np.column_stack([rng.uniform(0, 50, (8, 2)), rng.uniform(1, 30, (8, 2))])
    overlaps = iou_matrix(boxes, boxes)
    assert np.allclose(overlaps, overlaps.T)
    assert (overlaps >= 0).all() and (overlaps <= 1 + 1e-12).all()
    assert np.allclose(np.diag(overlaps), 1.0)


def test_observation_round_trip():
    box = BoundingBox(10, 20, 30, 60)
    obs = to_observation(box)
    assert obs == Observation(25.0, 50.0, 0.5, 60.0)
    back = obs.to_box()
    assert back.as_array() == pytest.approx(box.as_array())


def test_detection_validates_confidence_and_descriptor():
    box = BoundingBox(0, 0, 10, 10)
    with pytest.raises(ValueError):
        Detection(0, box, 1.5)
    with pytest.raises(ValueError):
        Detection(-1, box, 0.5)
    with pytest.raises(ValueError):
        Detection(0, box, 0.5, np.ones(128))
    unit = np.ones(128) / math.sqrt(128)
    assert Detection(0, box, 0.5, unit).descriptor is unit


def test_nms_suppresses_overlapping_lower_confidence():
    dets = [
        Detection(1, BoundingBox(0, 0, 10, 10), 0.6),
        Detection(1, BoundingBox(1, 1, 10, 10), 0.9),
        Detection(1, BoundingBox(50, 50, 10, 10), 0.7),
    ]
    kept = nms(dets, 0.3)
    assert kept == [dets[1], dets[2]]


def test_nms_empty_and_mixed_frames():
    assert nms([], 0.3) == []
    dets = [
        Detection(1, BoundingBox(0, 0, 10, 10), 0.6),
        Detection(2, BoundingBox(0, 0, 10, 10), 0.6),
    ]
    with pytest.raises(ValueError):
        nms(dets, 0.3)


def test_nms_matches_pairwise_oracle():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        xy = rng.uniform(0, 60, (n, 2))
        wh = rng.uniform(5, 40, (n, 2))
        # coarse confidences so ties occur
        confidences = rng.integers(0, 5, n) / 4.0
        threshold = float(rng.choice([0.0, 0.3, 0.5, 0.7]))
        boxes = [tuple(map(float, (*xy[i], *wh[i]))) for i in range(n)]
        dets = [
            Detection(0, BoundingBox(*boxes[i]), float(confidences[i])) for i in range(n)
        ]
        kept = nms(dets, threshold)
        expected = [dets[i] for i in _nms_oracle(boxes, confidences, threshold)]
        assert kept == expected


def test_nms_threshold_one_keeps_every_box():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 11))
        boxes = [
            BoundingBox(*map(float, (*rng.uniform(0, 60, 2), *rng.uniform(5, 40, 2))))
            for _ in range(n)
        ]
        boxes.append(boxes[0])
        dets = [Detection(0, box, float(rng.integers(0, 5)) / 4.0) for box in boxes]
        kept = nms(dets, 1.0)
        assert len(kept) == len(dets)
        assert {id(det) for det in kept} == {id(det) for det in dets}
        confidences = [det.confidence for det in kept]
        assert confidences == sorted(confidences, reverse=True)
