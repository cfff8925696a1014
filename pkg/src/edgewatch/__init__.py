"""
edgewatch - CPU-efficient multi-object tracking and trajectory anomaly
detection for surveillance detection streams.
Exposes the pipeline, its configuration and the tracking core.
"""

# Package metadata used by tooling and reports
__version__ = "1.0.0"

# Public API re-exports for convenience
from edgewatch.anomaly import AnomalyCode, AnomalyEngine, AnomalyEvent, AnomalyParams
from edgewatch.association import AssociationConfig, Tracker
from edgewatch.config import ConfigError, PipelineConfig
from edgewatch.geometry import BoundingBox, Detection
from edgewatch.pipeline import Pipeline

__all__ = [
    "AnomalyCode",
    "AnomalyEngine",
    "AnomalyEvent",
    "AnomalyParams",
    "AssociationConfig",
    "BoundingBox",
    "ConfigError",
    "Detection",
    "Pipeline",
    "PipelineConfig",
    "Tracker",
]
