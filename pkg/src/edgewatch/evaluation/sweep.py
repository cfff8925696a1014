"""
Parameter sweep over a configuration grid.

A grid names one or more axes, each a list of values:

    grid:
      encoder_size: [128x64, 64x32]
      max_cos_distance: [0.6, 0.9]
      nms_overlap: [0.3, 0.5]

Axes may also name any association field (lambda_weight, i_max, ...).
Every grid point is evaluated independently; a failing point becomes a row
with an error message instead of aborting the sweep.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union
import itertools
import logging

import pandas as pd
import yaml

from edgewatch.appearance.encoders import parse_encoder_size
from edgewatch.association import AssociationConfig
from edgewatch.config import PipelineConfig
from edgewatch.evaluation.suite import evaluate_config


logger = logging.getLogger(__name__)

ENCODER_AXIS = "encoder_size"
NMS_AXIS = "nms_overlap"
TABLE_AXES = (ENCODER_AXIS, "max_cos_distance", NMS_AXIS)
ASSOCIATION_AXES = tuple(f.name for f in fields(AssociationConfig))


class GridError(ValueError):
    """Raised for malformed sweep grids."""


@dataclass(frozen=True)
class SweepConfig:
    axes: Tuple[Tuple[str, Tuple[Any, ...]], ...]

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "SweepConfig":
        try:
            with open(path, "r") as handle:
                data = yaml.safe_load(handle)
        except FileNotFoundError:
            raise GridError(f"Grid file not found: {path}") from None
        except yaml.YAMLError as exc:
            raise GridError(f"Grid file {path} is not valid YAML: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Any) -> "SweepConfig":
        if isinstance(data, Mapping) and "grid" in data:
            data = data["grid"]
        if not isinstance(data, Mapping) or not data:
            raise GridError("Grid must be a non-empty mapping of axis name to values")
        axes = []
        for name, values in data.items():
            if name not in TABLE_AXES and name not in ASSOCIATION_AXES:
                raise GridError(
                    f"Unknown grid axis '{name}'. Supported: "
                    f"{', '.join(dict.fromkeys(TABLE_AXES + ASSOCIATION_AXES))}"
                )
            if not isinstance(values, list) or not values:
                raise GridError(f"Grid axis '{name}' must be a non-empty list")
            axes.append((name, tuple(cls._parse_value(name, v) for v in values)))
        return cls(tuple(axes))

    @staticmethod
    def _parse_value(name: str, value: Any) -> Any:
        if name == ENCODER_AXIS:
            try:
                height, width = parse_encoder_size(value)
            except ValueError as exc:
                raise GridError(f"Grid axis '{name}': {exc}") from None
            return f"{height}x{width}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise GridError(f"Grid axis '{name}' values must be numbers, got {value!r}")
        return value

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.axes]

    def points(self) -> List[Dict[str, Any]]:
        names = self.names
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(values for _, values in self.axes))
        ]


def apply_point(config: PipelineConfig, point: Mapping[str, Any]) -> PipelineConfig:
    for name, value in point.items():
        if name == ENCODER_AXIS:
            config = config.override("encoder", input_size=value)
        elif name == NMS_AXIS:
            config = config.override("input", nms_overlap=value)
        else:
            config = config.override("association", **{name: value})
    return config


def evaluate_point(config: PipelineConfig, point: Mapping[str, Any]) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        ENCODER_AXIS: config.encoder.label,
        "max_cos_distance": config.association.max_cos_distance,
        NMS_AXIS: config.input.nms_overlap,
    }
    row.update(point)
    try:
        cell = apply_point(config, point).check()
        row["auc"] = evaluate_config(cell)
        row["error"] = ""
    except Exception as exc:
        logger.warning("Sweep point %s failed: %s", dict(point), exc)
        row["auc"] = float("nan")
        row["error"] = str(exc)
    return row


def run_sweep(
    config: PipelineConfig, sweep: SweepConfig, workers: int = 1
) -> pd.DataFrame:
    """
    Evaluate every grid point. The table has one row per point, sorted by
    the configuration columns, with columns encoder, max_cos_distance,
    nms_overlap, any extra axes, auc and error.
    """
    points = sweep.points()
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_point, [config] * len(points), points))
    else:
        rows = [evaluate_point(config, point) for point in points]

    extra = [name for name in sweep.names if name not in TABLE_AXES]
    columns = list(TABLE_AXES) + extra
    table = pd.DataFrame(rows, columns=columns + ["auc", "error"])
    table = table.sort_values(columns, kind="stable").reset_index(drop=True)
    return table.rename(columns={ENCODER_AXIS: "encoder"})


def write_sweep_table(table: pd.DataFrame, path: Union[str, Path]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")


def format_table(table: pd.DataFrame) -> str:
    return table.to_string(index=False, float_format=lambda value: f"{value:.4f}")


__all__ = [
    "GridError",
    "SweepConfig",
    "apply_point",
    "evaluate_point",
    "format_table",
    "run_sweep",
    "write_sweep_table",
]
