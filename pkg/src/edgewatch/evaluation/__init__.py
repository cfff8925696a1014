"""
Evaluation: frame-level AUC and the timing model.

The pipeline-driven parts live in edgewatch.evaluation.suite (scenario
scoring), edgewatch.evaluation.sweep (parameter grids) and
edgewatch.evaluation.bench (stage timing); they import the pipeline and
are not re-exported here.
"""

from edgewatch.evaluation.metrics import EvalRecord, UndefinedAucError, frame_auc
from edgewatch.evaluation.timing import TimingModel, predict_time

__all__ = [
    "EvalRecord",
    "TimingModel",
    "UndefinedAucError",
    "frame_auc",
    "predict_time",
]
