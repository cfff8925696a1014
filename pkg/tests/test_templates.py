"""Tests for template similarity matching."""

from pathlib import Path

import numpy as np
import pytest

from edgewatch.anomaly import (
    AnomalyCode,
    AnomalyEngine,
    AnomalyParams,
    AnomalyTemplate,
    SequenceTooShortError,
    TemplateMatcher,
    builtin_templates,
    load_templates,
    match_templates,
)
from edgewatch.association import FrameResult, TrackSnapshot
from edgewatch.geometry import Observation


FIXTURES_DIR = Path(__file__).parent / "fixtures"


def _unit_rows(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _theta(profile, sequence, shift):
    """Direct sum of positive cosine similarities at one shift."""
    window = _unit_rows(sequence[shift:shift + len(profile)])
    return float(np.maximum((profile * window).sum(axis=1), 0.0).sum())


def test_identical_sequence_matches_at_shift_zero():
    rng = np.random.default_rng(0)
    template = AnomalyTemplate.from_rows(AnomalyCode.LOITER, rng.normal(size=(6, 8)))
    match = match_templates(template.profile, [template])
    assert match.shift == 0
    assert match.similarity == pytest.approx(6.0)
    assert match.normalized == pytest.approx(1.0)
    assert match.code == AnomalyCode.LOITER


def test_orthogonal_sequence_scores_zero():
    template = AnomalyTemplate.from_rows(AnomalyCode.FAST, np.tile(np.eye(8)[0], (4, 1)))
    sequence = np.tile(np.eye(8)[1], (12, 1))
    assert match_templates(sequence, [template]).similarity == 0.0


def test_anti_aligned_sequence_is_clamped():
    template = AnomalyTemplate.from_rows(AnomalyCode.FAST, np.tile(np.eye(8)[0], (4, 1)))
    sequence = -np.tile(np.eye(8)[0], (6, 1))
    assert match_templates(sequence, [template]).similarity == 0.0


def test_planted_template_is_recovered():
    rng = np.random.default_rng(1)
    profile = rng.normal(size=(10, 8))
    template = AnomalyTemplate.from_rows(AnomalyCode.JUMP, profile)
    sequence = rng.normal(size=(50, 8))
    sequence[7:17] = profile * rng.uniform(0.5, 2.0, (10, 1))
    match = match_templates(sequence, [template])
    assert match.shift == 7
    assert match.similarity == pytest.approx(10.0)


def test_incremental_search_matches_all_shifts():
    rng = np.random.default_rng(2)
    for _ in range(200):
        length = int(rng.integers(1, 12))
        template = AnomalyTemplate.from_rows(AnomalyCode.CIRCULAR, rng.normal(size=(length, 8)))
        sequence = rng.normal(size=(int(rng.integers(length, 60)), 8))

        direct = [
            _theta(template.profile, sequence, shift)
            for shift in range(len(sequence) - length + 1)
        ]
        match = match_templates(sequence, [template])
        assert match.shift == int(np.argmax(direct))
        assert abs(match.similarity - max(direct)) < 1e-9

        matcher = TemplateMatcher(template)
        completed = [matcher.push(vector) for vector in sequence]
        assert completed[: length - 1] == [None] * (length - 1)
        for shift, (done, theta) in enumerate(completed[length - 1:]):
            assert done == shift
            assert abs(theta - direct[shift]) < 1e-9


def test_shift_set_restricts_search():
    rng = np.random.default_rng(3)
    profile = rng.normal(size=(5, 8))
    template = AnomalyTemplate.from_rows(AnomalyCode.FAST, profile)
    sequence = rng.normal(size=(30, 8))
    sequence[20:25] = profile
    assert match_templates(sequence, [template]).shift == 20
    restricted = match_templates(sequence, [template], shifts=[0, 1, 2])
    assert restricted.shift in (0, 1, 2)
    with pytest.raises(ValueError, match="No allowed shift"):
        match_templates(sequence, [template], shifts=[100])


def test_best_template_wins():
    rng = np.random.default_rng(4)
    first = AnomalyTemplate.from_rows(AnomalyCode.LOITER, rng.normal(size=(4, 8)))
    second = AnomalyTemplate.from_rows(AnomalyCode.JUMP, rng.normal(size=(4, 8)))
    match = match_templates(second.profile, [first, second])
    assert match.code == AnomalyCode.JUMP


def test_sequence_shorter_than_templates():
    template = AnomalyTemplate.from_rows(AnomalyCode.LOITER, np.ones((10, 8)))
    with pytest.raises(SequenceTooShortError):
        match_templates(np.ones((9, 8)), [template])


def test_match_requires_templates():
    with pytest.raises(ValueError):
        match_templates(np.ones((3, 8)), [])


def test_template_rows_are_normalized():
    template = AnomalyTemplate.from_rows("fast", [[3.0, 4.0], [0.0, 2.0]])
    assert np.allclose(np.linalg.norm(template.profile, axis=1), 1.0)
    assert template.length == 2
    with pytest.raises(ValueError):
        AnomalyTemplate.from_rows("fast", [[0.0, 0.0]])
    with pytest.raises(ValueError):
        AnomalyTemplate(AnomalyCode.FAST, np.array([[2.0, 0.0]]))


def test_load_templates_from_yaml():
    templates = load_templates(FIXTURES_DIR / "templates.yaml")
    assert [(t.name, t.code, t.length) for t in templates] == [
        ("pacing", AnomalyCode.LOITER, 3),
        ("sprint", AnomalyCode.FAST, 1),
    ]


def test_load_templates_rejects_incomplete_entries(tmp_path):
    path = tmp_path / "templates.yaml"
    path.write_text("templates:\n  - name: broken\n    code: loiter\n")
    with pytest.raises(ValueError, match="needs 'code' and 'profile'"):
        load_templates(path)


def test_builtin_templates_cover_single_track_classes():
    p = AnomalyParams()
    templates = builtin_templates(p)
    assert [t.code for t in templates] == [
        AnomalyCode.LOITER,
        AnomalyCode.FAST,
        AnomalyCode.CIRCULAR,
        AnomalyCode.JUMP,
    ]
    assert all(t.length == p.template_length for t in templates)


def test_engine_template_path_flags_stationary_track():
    p = AnomalyParams(rules_enabled=False, templates_enabled=True)
    engine = AnomalyEngine(p, builtin_templates(p))
    obs = Observation(200.0, 300.0, 0.4, 100.0)
    for frame in range(100):
        engine.process(FrameResult(frame, active_tracks=(TrackSnapshot(1, obs, obs, 0, 10),)))
    events = engine.events
    assert [e.code for e in events] == [AnomalyCode.LOITER]
    assert events[0].source == "template"
    assert events[0].frame_start == 1
    assert events[0].frame_end == 99


def test_engine_ignores_templates_when_disabled():
    engine = AnomalyEngine(AnomalyParams(), builtin_templates())
    assert engine.templates == []
