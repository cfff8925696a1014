"""
Trajectory anomaly detection: motion features, rules, template matching,
event consolidation and frame scoring.
"""

from edgewatch.anomaly.engine import AnomalyEngine, TrackBuffer
from edgewatch.anomaly.events import (
    AnomalyCode,
    AnomalyEvent,
    EventLog,
    ScoreBoard,
    frame_regularity_score,
)
from edgewatch.anomaly.features import (
    MotionFeatures,
    WindowTooShortError,
    features_from_arrays,
    motion_features,
)
from edgewatch.anomaly.groups import GroupSample, detect_dispersion, detect_gathering
from edgewatch.anomaly.params import AnomalyParams
from edgewatch.anomaly.rules import (
    JumpHit,
    detect_circular,
    detect_fast_motion,
    detect_jump,
    detect_loitering,
)
from edgewatch.anomaly.scene import SceneStats
from edgewatch.anomaly.templates import (
    AnomalyTemplate,
    SequenceTooShortError,
    TemplateMatch,
    TemplateMatcher,
    builtin_templates,
    feature_vector,
    load_templates,
    match_templates,
)

__all__ = [
    "AnomalyCode",
    "AnomalyEngine",
    "AnomalyEvent",
    "AnomalyParams",
    "AnomalyTemplate",
    "EventLog",
    "GroupSample",
    "JumpHit",
    "MotionFeatures",
    "SceneStats",
    "ScoreBoard",
    "SequenceTooShortError",
    "TemplateMatch",
    "TemplateMatcher",
    "TrackBuffer",
    "WindowTooShortError",
    "builtin_templates",
    "detect_circular",
    "detect_dispersion",
    "detect_fast_motion",
    "detect_gathering",
    "detect_jump",
    "detect_loitering",
    "feature_vector",
    "features_from_arrays",
    "frame_regularity_score",
    "load_templates",
    "match_templates",
    "motion_features",
]
