"""Tests for the streaming run: chunked log writing and bounded state."""

import itertools

import pandas as pd

from edgewatch.config import PipelineConfig
from edgewatch.pipeline import EVENT_LOG_COLUMNS, Pipeline, RunLogWriter, open_frames


def _config(scenario="loiter"):
    return PipelineConfig().override("input", scenario=scenario)


def _writer(tmp_path, flush_frames=10):
    return RunLogWriter(tmp_path / "tracks.csv", tmp_path / "events.csv", flush_frames)


def test_writer_starts_with_headers(tmp_path):
    _writer(tmp_path)
    assert (tmp_path / "tracks.csv").read_text() == "frame,track_id,x,y,w,h,status\n"
    assert pd.read_csv(tmp_path / "events.csv").empty


def test_track_rows_are_written_per_chunk(tmp_path):
    config = _config()
    writer = _writer(tmp_path, flush_frames=10)
    pipeline = Pipeline(config, writer=writer)
    frames, _ = open_frames(config)
    for frame, dets in itertools.islice(frames, 25):
        pipeline.step(frame, dets)
        # the loiter scene has four actors
        assert len(writer._tracks) <= 10 * 4

    written = pd.read_csv(tmp_path / "tracks.csv")
    assert len(written) == writer.tracks_written > 0
    assert written["frame"].max() < 20

    pipeline.close()
    written = pd.read_csv(tmp_path / "tracks.csv")
    assert writer.pending == 0
    assert written["frame"].max() == 24


def test_streamed_event_log_matches_retained_events(tmp_path):
    config = _config()
    frames, _ = open_frames(config)
    streaming = Pipeline(config, writer=_writer(tmp_path, flush_frames=7))
    summary = streaming.run(frames)
    streaming.close()
    assert not streaming.engine.retain
    assert summary.scores.size == 0

    frames, _ = open_frames(config)
    retained = Pipeline(config)
    retained.run(frames)
    expected = pd.DataFrame(
        [event.to_row() for event in retained.events], columns=EVENT_LOG_COLUMNS
    )

    logged = pd.read_csv(tmp_path / "events.csv", dtype={"track_ids": str})
    assert summary.event_count == len(expected) == len(logged) > 0
    key = ["frame_start", "code", "track_ids"]
    logged = logged.sort_values(key).reset_index(drop=True)
    expected = expected.sort_values(key).reset_index(drop=True)
    pd.testing.assert_frame_equal(logged, expected, check_dtype=False)
