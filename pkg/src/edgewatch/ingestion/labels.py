"""
Frame label files: CSV with header `frame,label` and optionally one 0/1
column per anomaly class.
"""

from pathlib import Path
from typing import IO, Union

import numpy as np
import pandas as pd

from edgewatch.anomaly.events import AnomalyCode
from edgewatch.ingestion.scenarios import Scenario


class LabelError(ValueError):
    """Raised for unreadable or inconsistent label files."""


def write_labels(scenario: Scenario, dest: Union[str, Path, IO[str]]) -> None:
    table = {
        "frame": np.arange(scenario.duration),
        "label": scenario.labels.astype(int),
    }
    for code in AnomalyCode:
        table[code.label] = scenario.class_labels[code].astype(int)
    pd.DataFrame(table).to_csv(dest, index=False, lineterminator="\n")


def read_labels(source: Union[str, Path, IO[str]], column: str = "label") -> np.ndarray:
    """Boolean per-frame labels, ordered by the frame column when present."""
    return read_label_series(source, column).to_numpy()


def read_label_series(
    source: Union[str, Path, IO[str]], column: str = "label"
) -> pd.Series:
    """
    Boolean labels indexed by frame. Without a frame column the index is the
    row position and is not named "frame".
    """
    try:
        df = pd.read_csv(source)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise LabelError(f"Cannot read labels: {exc}") from exc
    if column not in df.columns:
        raise LabelError(f"Label file has no '{column}' column (columns: {list(df.columns)})")
    if "frame" in df.columns:
        frames = pd.to_numeric(df["frame"], errors="coerce")
        if frames.isna().any() or not (frames == frames.round()).all():
            raise LabelError("Label frames must be integers")
        df = df.assign(frame=frames.astype("int64"))
        if df["frame"].duplicated().any():
            raise LabelError("Label file repeats a frame")
        df = df.sort_values("frame", kind="stable")
    values = pd.to_numeric(df[column], errors="coerce")
    if values.isna().any() or not values.isin([0, 1]).all():
        row = int((values.isna() | ~values.isin([0, 1])).to_numpy().argmax())
        raise LabelError(f"Label values must be 0 or 1 (data row {row + 1})")
    labels = values.astype(bool)
    if "frame" in df.columns:
        labels.index = pd.Index(df["frame"], name="frame")
    else:
        labels = labels.reset_index(drop=True)
    return labels


__all__ = ["LabelError", "read_label_series", "read_labels", "write_labels"]
