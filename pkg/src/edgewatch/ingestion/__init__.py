"""
Input side of the pipeline: detection files, descriptor sidecars, label
files and the synthetic scenario generator.
"""

from edgewatch.ingestion.builtin import (
    SCENARIO_CLASSES,
    SCENARIOS,
    SUITE,
    SUITE_NAME,
    get_scenario_spec,
    load_scenario_spec,
)
from edgewatch.ingestion.descriptors import (
    DescriptorParseError,
    attach_descriptors,
    parse_descriptors,
    serialize_descriptors,
)
from edgewatch.ingestion.detections import (
    DetectionParseError,
    fill_gaps,
    parse_detections,
    serialize_detections,
    stream_detections,
    write_parquet,
)
from edgewatch.ingestion.labels import LabelError, read_label_series, read_labels, write_labels
from edgewatch.ingestion.scenarios import (
    ActorScript,
    Scenario,
    ScenarioError,
    ScenarioSpec,
    generate_scenario,
)

__all__ = [
    "ActorScript",
    "DescriptorParseError",
    "DetectionParseError",
    "LabelError",
    "SCENARIOS",
    "SCENARIO_CLASSES",
    "SUITE",
    "SUITE_NAME",
    "Scenario",
    "ScenarioError",
    "ScenarioSpec",
    "attach_descriptors",
    "fill_gaps",
    "generate_scenario",
    "get_scenario_spec",
    "load_scenario_spec",
    "parse_descriptors",
    "parse_detections",
    "read_label_series",
    "read_labels",
    "serialize_descriptors",
    "serialize_detections",
    "stream_detections",
    "write_labels",
    "write_parquet",
]
