"""
Scenario evaluation: run the pipeline over labelled frames and score it.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from edgewatch.anomaly.events import AnomalyCode
from edgewatch.config import PipelineConfig
from edgewatch.evaluation.metrics import EvalRecord, frame_auc
from edgewatch.ingestion.builtin import SCENARIO_CLASSES, SUITE, SUITE_NAME, get_scenario_spec
from edgewatch.ingestion.labels import read_label_series
from edgewatch.ingestion.scenarios import Scenario, generate_scenario
from edgewatch.pipeline import Pipeline, open_frames


logger = logging.getLogger(__name__)


@dataclass
class ScenarioRun:
    name: str
    scenario: Scenario
    pipeline: Pipeline

    def record(self, code: Optional[AnomalyCode] = None) -> EvalRecord:
        if code is None:
            labels = self.scenario.labels
        else:
            labels = self.scenario.class_labels[code]
        scores = self.pipeline.frame_scores(code)
        return EvalRecord(scores, labels)


@dataclass
class SuiteReport:
    per_class: Dict[AnomalyCode, float] = field(default_factory=dict)
    pooled: float = 0.0
    runs: List[ScenarioRun] = field(default_factory=list)

    def rows(self) -> List[Dict[str, object]]:
        rows = [
            {"class": code.label, "auc": round(auc, 6)}
            for code, auc in sorted(self.per_class.items())
        ]
        rows.append({"class": "pooled", "auc": round(self.pooled, 6)})
        return rows


def run_scenario(config: PipelineConfig, scenario: Scenario, name: str = "") -> ScenarioRun:
    pipeline = Pipeline(config)
    pipeline.run(scenario.frames)
    return ScenarioRun(name or scenario.spec.name, scenario, pipeline)


def evaluate_suite(
    config: PipelineConfig, names: Sequence[str] = SUITE
) -> SuiteReport:
    """
    Run every named scenario with the same seed. Each anomaly class is
    scored with its class-filtered scores on the scenario that enacts it;
    the pooled AUC uses the overall regularity score over all scenarios.
    """
    report = SuiteReport()
    for name in names:
        scenario = generate_scenario(get_scenario_spec(name), seed=config.seed)
        run = run_scenario(config, scenario, name)
        report.runs.append(run)
        code = SCENARIO_CLASSES.get(name)
        if code is not None:
            report.per_class[code] = frame_auc(run.record(code))
    report.pooled = frame_auc(EvalRecord.concatenate([run.record() for run in report.runs]))
    return report


def evaluate_config(config: PipelineConfig) -> float:
    """
    The AUC for the configured input: the pooled suite AUC, a single
    scenario against its own labels, or a detection file against a label
    file.
    """
    if config.input.scenario == SUITE_NAME:
        return evaluate_suite(config).pooled
    if config.input.scenario:
        frames, scenario = open_frames(config)
        pipeline = Pipeline(config)
        pipeline.run(frames)
        return frame_auc(EvalRecord(pipeline.frame_scores(), scenario.labels))
    if not config.input.labels:
        raise ValueError("Evaluating a detection file needs a label file (input.labels)")
    labels = read_label_series(config.input.labels)
    frames, _ = open_frames(config)
    pipeline = Pipeline(config)
    pipeline.run(frames)
    scores = pipeline.frame_scores()
    return frame_auc(join_labels(scores, pipeline.engine.first_frame, labels))


def join_labels(
    scores: np.ndarray, first_frame: Optional[int], labels: pd.Series
) -> EvalRecord:
    """
    Pair the scores of frames first_frame.. with labels on the frame number.

    Labels without a frame column count from the first processed frame.
    Labelled frames the stream never reached score 0.0. A processed frame
    without a label is an error.
    """
    start = 0 if first_frame is None else first_frame
    processed = pd.Index(np.arange(start, start + len(scores)), name="frame")
    if labels.index.name != "frame":
        labels = pd.Series(labels.to_numpy(), index=labels.index + start)
    unlabelled = processed.difference(labels.index)
    if len(unlabelled):
        raise ValueError(
            f"Label file covers {len(labels)} frames but has no label for "
            f"{len(unlabelled)} processed frame(s), first {int(unlabelled[0])}"
        )
    joined = pd.Series(scores, index=processed).reindex(labels.index, fill_value=0.0)
    unseen = len(labels) - len(processed)
    if unseen:
        logger.info("%d labelled frame(s) had no detections and score 0.0", unseen)
    return EvalRecord(joined.to_numpy(dtype=np.float64), labels.to_numpy(dtype=bool))


__all__ = [
    "ScenarioRun",
    "SuiteReport",
    "evaluate_config",
    "evaluate_suite",
    "join_labels",
    "run_scenario",
]
