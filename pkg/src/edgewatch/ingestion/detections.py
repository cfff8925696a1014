"""
Detection file parsing and serialization.

Format: one record per line, `frame,id,x,y,w,h,confidence`, no header, with
id always -1 on input. CSV is read through pandas; `.parquet` / `.pq` files
go through pyarrow with the same validation.
"""

from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Tuple, Union
import io
import logging
import re

import numpy as np
import pandas as pd

from edgewatch.geometry import BoundingBox, Detection


logger = logging.getLogger(__name__)

COLUMNS = ["frame", "id", "x", "y", "w", "h", "confidence"]
RESERVED_ID = -1
PARQUET_SUFFIXES = {".parquet", ".pq"}

Source = Union[str, Path, IO[str], IO[bytes]]
FrameDetections = Tuple[int, List[Detection]]


class DetectionParseError(ValueError):
    """Raised for a malformed detection record; line_number is 1-based."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


def read_table(source: Source, width: int, error_cls=DetectionParseError, **kwargs):
    """
    Read a headerless CSV as strings. Returns None for an empty source.
    Raises error_cls naming the offending line for ragged rows.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        df = pd.read_csv(
            source,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            **kwargs,
        )
    except pd.errors.EmptyDataError:
        return None
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        line = int(match.group(1)) if match else None
        raise error_cls(f"expected {width} fields ({exc})", line) from exc
    except UnicodeDecodeError as exc:
        raise error_cls(f"input is not UTF-8 text ({exc})") from exc
    return df


def _check_width(df: pd.DataFrame, width: int, error_cls) -> pd.DataFrame:
    if df.shape[1] != width:
        raise error_cls(f"expected {width} fields, got {df.shape[1]}", int(df.index[0]) + 1)
    df = df.fillna("")
    df.columns = range(width)
    return df


def _blank_rows(df: pd.DataFrame) -> pd.Series:
    return (df.astype(str).apply(lambda col: col.str.strip()) == "").all(axis=1)


def records_to_detections(df: pd.DataFrame) -> List[Tuple[int, Detection]]:
    """
    Validate a 7-column frame of records and return (line_number, Detection)
    pairs in file order. Line numbers are 1-based row positions.
    """
    if df.empty:
        return []
    df = df.copy()
    df.columns = COLUMNS
    blank = _blank_rows(df)
    values = df[~blank].apply(pd.to_numeric, errors="coerce")

    for name in COLUMNS:
        bad = values[name].isna() | ~np.isfinite(values[name].astype(float))
        if bad.any():
            row = bad.idxmax()
            raise DetectionParseError(
                f"field '{name}' is not a finite number ({df.at[row, name]!r})", int(row) + 1
            )

    checks = [
        (values["frame"] < 0, "frame must be non-negative"),
        (values["frame"] != np.floor(values["frame"]), "frame must be an integer"),
        (values["id"] != RESERVED_ID, f"id must be {RESERVED_ID}"),
        (values["w"] <= 0, "width must be positive"),
        (values["h"] <= 0, "height must be positive"),
        ((values["confidence"] < 0) | (values["confidence"] > 1), "confidence must lie in [0, 1]"),
    ]
    for mask, message in checks:
        if mask.any():
            raise DetectionParseError(message, int(mask.idxmax()) + 1)

    records = []
    for row in values.itertuples():
        box = BoundingBox(float(row.x), float(row.y), float(row.w), float(row.h))
        records.append((int(row.Index) + 1, Detection(int(row.frame), box, float(row.confidence))))
    return records


def _group(records: Iterable[Detection]) -> List[FrameDetections]:
    grouped: Dict[int, List[Detection]] = {}
    for det in records:
        grouped.setdefault(det.frame, []).append(det)
    return [(frame, grouped[frame]) for frame in sorted(grouped)]


def parse_detections(source: Source) -> List[FrameDetections]:
    """
    Parse a whole detection file. Records may appear in any frame order; they
    are grouped by frame, frames ascending, within-frame file order kept.
    """
    if isinstance(source, (str, Path)) and Path(source).suffix.lower() in PARQUET_SUFFIXES:
        return _group(det for _, det in records_to_detections(_read_parquet(source)))
    df = read_table(source, len(COLUMNS))
    if df is None:
        return []
    df = _check_width(df, len(COLUMNS), DetectionParseError)
    return _group(det for _, det in records_to_detections(df))


def stream_detections(source: Source, chunksize: int = 1000) -> Iterator[FrameDetections]:
    """
    Incrementally parse a detection stream (e.g. a detector writing to a
    pipe). Frames must arrive in ascending order; each frame is yielded once
    the next frame starts or the stream ends.
    """
    reader = read_table(source, len(COLUMNS), chunksize=chunksize)
    if reader is None:
        return
    current: Optional[int] = None
    pending: List[Detection] = []
    try:
        for chunk in reader:
            chunk = _check_width(chunk, len(COLUMNS), DetectionParseError)
            for line, det in records_to_detections(chunk):
                if current is not None and det.frame < current:
                    raise DetectionParseError(
                        f"frame {det.frame} arrives after frame {current} in a stream", line
                    )
                if current is not None and det.frame != current:
                    yield current, pending
                    pending = []
                current = det.frame
                pending.append(det)
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise DetectionParseError(
            f"malformed record ({exc})", int(match.group(1)) if match else None
        ) from exc
    if current is not None:
        yield current, pending


def fill_gaps(stream: Iterable[FrameDetections]) -> Iterator[FrameDetections]:
    """Yield an empty frame for every frame missing between observed frames."""
    previous: Optional[int] = None
    for frame, dets in stream:
        if previous is not None:
            for missing in range(previous + 1, frame):
                yield missing, []
        yield frame, dets
        previous = frame


def detections_frame(stream: Iterable[FrameDetections]) -> pd.DataFrame:
    rows = [
        (frame, RESERVED_ID, det.box.x, det.box.y, det.box.w, det.box.h, det.confidence)
        for frame, dets in stream
        for det in dets
    ]
    df = pd.DataFrame(rows, columns=COLUMNS)
    return df.astype({"frame": "int64", "id": "int64"})


def serialize_detections(stream: Iterable[FrameDetections], dest: Union[str, Path, IO[str]]) -> None:
    """Write records in the parse format; floats keep their shortest repr."""
    df = detections_frame(stream)
    df.to_csv(dest, header=False, index=False, lineterminator="\n")


def _read_parquet(path: Union[str, Path]) -> pd.DataFrame:
    df = pd.read_parquet(path)
    if list(df.columns[: len(COLUMNS)]) != COLUMNS:
        if df.shape[1] != len(COLUMNS):
            raise DetectionParseError(
                f"Parquet file needs columns {COLUMNS}, got {list(df.columns)}"
            )
    df = df.iloc[:, : len(COLUMNS)].reset_index(drop=True)
    logger.debug("Loaded %d detection rows from %s", len(df), path)
    return df


def write_parquet(stream: Iterable[FrameDetections], path: Union[str, Path]) -> None:
    detections_frame(stream).to_parquet(path, index=False)


__all__ = [
    "COLUMNS",
    "DetectionParseError",
    "FrameDetections",
    "fill_gaps",
    "parse_detections",
    "read_table",
    "serialize_detections",
    "stream_detections",
    "write_parquet",
]
