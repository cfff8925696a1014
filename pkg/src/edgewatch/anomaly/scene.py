"""
Running scene statistics that the fast-motion and jump rules compare against.
"""

from dataclasses import dataclass
from typing import Iterable, Optional
import math

import numpy as np


@dataclass
class SceneStats:
    """
    Running count, mean and M2 of a scalar, merged with Chan's parallel
    update so batches and single samples combine exactly.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "SceneStats":
        stats = cls()
        stats.add_batch(np.fromiter(values, dtype=np.float64))
        return stats

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def add_batch(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        batch_count = len(values)
        if batch_count == 0:
            return
        batch_mean = float(values.mean())
        batch_m2 = float(values.var()) * batch_count

        prev_count = self.count
        new_count = prev_count + batch_count
        delta = batch_mean - self.mean
        self.mean += delta * batch_count / new_count
        self.m2 += batch_m2 + delta ** 2 * prev_count * batch_count / new_count
        self.count = new_count

    @property
    def std(self) -> Optional[float]:
        """Population standard deviation; None until two samples exist."""
        if self.count < 2:
            return None
        return math.sqrt(max(self.m2, 0.0) / self.count)
