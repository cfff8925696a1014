"""
Frame-level AUC.

The AUC is the Mann-Whitney statistic: the probability that a random
anomalous frame outscores a random normal one, ties counting one half.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.stats import rankdata


class UndefinedAucError(ValueError):
    """Raised when the labels hold only one class."""


@dataclass(frozen=True, eq=False)
class EvalRecord:
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        labels = np.asarray(self.labels).astype(bool).ravel()
        if scores.shape != labels.shape:
            raise ValueError(
                f"Scores cover {scores.size} frames but labels cover {labels.size}"
            )
        if not np.isfinite(scores).all():
            raise ValueError("Scores must be finite")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def negatives(self) -> int:
        return int(self.labels.size - self.labels.sum())

    @classmethod
    def concatenate(cls, records: Sequence["EvalRecord"]) -> "EvalRecord":
        if not records:
            return cls(np.zeros(0), np.zeros(0, dtype=bool))
        return cls(
            np.concatenate([r.scores for r in records]),
            np.concatenate([r.labels for r in records]),
        )


def frame_auc(record: Union[EvalRecord, tuple]) -> float:
    if not isinstance(record, EvalRecord):
        record = EvalRecord(*record)
    n_pos, n_neg = record.positives, record.negatives
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAucError(
            f"AUC needs both classes; labels have {n_pos} anomalous and "
            f"{n_neg} normal frames"
        )
    ranks = rankdata(record.scores, method="average")
    u = ranks[record.labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


__all__ = ["EvalRecord", "UndefinedAucError", "frame_auc"]
