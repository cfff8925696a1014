"""
Descriptor sidecar files: `frame,det_index,v0,...,v127` per line.

det_index is the detection's position within its frame in the detection
file, before suppression. Vectors are re-normalized to unit length on load.
"""

from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, Optional, Tuple, Union

import numpy as np
import pandas as pd

from edgewatch.appearance.gallery import normalize_descriptor
from edgewatch.geometry import DESCRIPTOR_DIM
from edgewatch.ingestion.detections import FrameDetections, read_table


SIDECAR_WIDTH = DESCRIPTOR_DIM + 2

DescriptorMap = Dict[Tuple[int, int], np.ndarray]


class DescriptorParseError(ValueError):
    """Raised for a malformed sidecar line; line_number is 1-based."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


def parse_descriptors(source: Union[str, Path, IO[str], IO[bytes], bytes]) -> DescriptorMap:
    df = read_table(source, SIDECAR_WIDTH, DescriptorParseError)
    if df is None:
        return {}
    if df.shape[1] != SIDECAR_WIDTH:
        raise DescriptorParseError(
            f"expected {SIDECAR_WIDTH} fields (frame, det_index and "
            f"{DESCRIPTOR_DIM} values), got {df.shape[1]}",
            1,
        )
    present = df.notna().sum(axis=1).to_numpy()
    df = df.fillna("")
    blank = (df.apply(lambda col: col.str.strip()) == "").all(axis=1)
    short = ~blank.to_numpy() & (present != SIDECAR_WIDTH)
    if short.any():
        row = int(np.argmax(short))
        raise DescriptorParseError(
            f"expected {SIDECAR_WIDTH} fields, got {int(present[row])}",
            int(df.index[row]) + 1,
        )
    df = df[~blank]
    values = df.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    lines = df.index.to_numpy() + 1

    finite = np.isfinite(values)
    if not finite.all():
        row = int(np.argmin(finite.all(axis=1)))
        field = int(np.argmin(finite[row]))
        raise DescriptorParseError(
            f"field {field + 1} is not a finite number: {df.iat[row, field]!r}",
            int(lines[row]),
        )

    keys = values[:, :2]
    bad_key = (keys < 0).any(axis=1) | (keys != np.floor(keys)).any(axis=1)
    if bad_key.any():
        raise DescriptorParseError(
            "frame and det_index must be non-negative integers",
            int(lines[int(np.argmax(bad_key))]),
        )

    descriptors: DescriptorMap = {}
    for line, row in zip(lines, values):
        key = (int(row[0]), int(row[1]))
        if key in descriptors:
            raise DescriptorParseError(f"duplicate descriptor for {key}", int(line))
        try:
            descriptors[key] = normalize_descriptor(row[2:])
        except ValueError as exc:
            raise DescriptorParseError(str(exc), int(line)) from exc
    return descriptors


def attach_descriptors(
    stream: Iterable[FrameDetections], descriptors: DescriptorMap
) -> Iterator[FrameDetections]:
    """Attach sidecar descriptors by (frame, index within frame)."""
    for frame, dets in stream:
        with_desc = []
        for index, det in enumerate(dets):
            descriptor = descriptors.get((frame, index))
            if descriptor is None:
                raise DescriptorParseError(
                    f"no descriptor for frame {frame}, detection {index}"
                )
            with_desc.append(det.with_descriptor(descriptor))
        yield frame, with_desc


def serialize_descriptors(
    stream: Iterable[FrameDetections], dest: Union[str, Path, IO[str]]
) -> None:
    rows = []
    for frame, dets in stream:
        for index, det in enumerate(dets):
            if det.descriptor is None:
                continue
            rows.append([frame, index, *det.descriptor.tolist()])
    df = pd.DataFrame(rows, columns=range(SIDECAR_WIDTH))
    df = df.astype({0: "int64", 1: "int64"})
    df.to_csv(dest, header=False, index=False, lineterminator="\n")


__all__ = [
    "DescriptorMap",
    "DescriptorParseError",
    "SIDECAR_WIDTH",
    "attach_descriptors",
    "parse_descriptors",
    "serialize_descriptors",
]
