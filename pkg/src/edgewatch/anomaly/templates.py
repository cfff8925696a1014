"""
Template-similarity matching over per-track feature sequences.

A template is an L x D profile of unit rows. For a sequence T of feature
vectors, the similarity at shift w is

    theta(w) = sum_j max(0, cos(A_j, T_{w+j})),  j = 0 .. L-1

and the matcher reports the shift with the largest theta. TemplateMatcher
keeps the sums of the L still-open shifts and extends them as each new
vector arrives.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import math

import numpy as np
import yaml

from edgewatch.anomaly.events import AnomalyCode
from edgewatch.anomaly.features import MotionFeatures, features_from_arrays
from edgewatch.anomaly.params import AnomalyParams


FEATURE_SCALE = np.array([5.0, 2.0, 50.0, 50.0, 2 * math.pi, 20.0, 20.0])


class SequenceTooShortError(ValueError):
    """Raised when a feature sequence is shorter than every template."""


def feature_vector(f: MotionFeatures) -> np.ndarray:
    """
    Scaled, unit-normalized feature vector. The trailing constant keeps a
    motionless window from collapsing to the zero vector.
    """
    raw = np.array(
        [
            f.mean_speed,
            f.speed_std,
            f.net_displacement,
            f.path_length,
            abs(f.winding),
            f.vertical_amplitude,
            f.confinement_radius,
        ]
    )
    vector = np.append(raw / FEATURE_SCALE, 1.0)
    return vector / np.linalg.norm(vector)


@dataclass(frozen=True, eq=False)
class AnomalyTemplate:
    code: AnomalyCode
    profile: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "code", AnomalyCode(self.code))
        if self.profile.ndim != 2 or len(self.profile) == 0:
            raise ValueError("Template profile must be a non-empty L x D matrix")
        norms = np.linalg.norm(self.profile, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("Template profile rows must have unit norm")

    @classmethod
    def from_rows(cls, code, rows, name: str = "") -> "AnomalyTemplate":
        profile = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        norms = np.linalg.norm(profile, axis=1, keepdims=True)
        if np.any(norms == 0) or not np.all(np.isfinite(profile)):
            raise ValueError(f"Template '{name}' has zero or non-finite rows")
        return cls(AnomalyCode.parse(code), profile / norms, name)

    @property
    def length(self) -> int:
        return len(self.profile)


@dataclass(frozen=True)
class TemplateMatch:
    code: AnomalyCode
    shift: int
    similarity: float
    length: int

    @property
    def normalized(self) -> float:
        return self.similarity / self.length


class TemplateMatcher:
    """
    Incremental shift search for one template.

    Shift w collects contributions from sequence indices w .. w+L-1 in
    ascending order, so each completed theta(w) equals the direct sum.
    """

    def __init__(self, template: AnomalyTemplate):
        self.template = template
        self._partial = np.zeros(template.length)
        self._count = 0
        self.best: Optional[Tuple[int, float]] = None

    def __len__(self) -> int:
        return self._count

    def push(self, vector: np.ndarray) -> Optional[Tuple[int, float]]:
        """
        Extend every open shift with a new vector. Returns (w, theta(w)) for
        the shift that this vector completes, if any.
        """
        length = self.template.length
        k = self._count
        norm = np.linalg.norm(vector)
        unit = vector / norm if norm > 0 else np.zeros_like(vector, dtype=np.float64)
        sims = np.maximum(self.template.profile @ unit, 0.0)

        shifts = np.arange(max(0, k - length + 1), k + 1)
        self._partial[k % length] = 0.0
        self._partial[shifts % length] += sims[k - shifts]
        self._count += 1

        done = k - length + 1
        if done < 0:
            return None
        theta = float(self._partial[done % length])
        if self.best is None or theta > self.best[1]:
            self.best = (done, theta)
        return done, theta


def match_templates(
    sequence: Union[np.ndarray, Sequence[np.ndarray]],
    templates: Sequence[AnomalyTemplate],
    shifts: Optional[Sequence[int]] = None,
) -> TemplateMatch:
    """
    Best (template, shift) over the shift set. Shifts default to every start
    offset a template fits at. Ties keep the earlier template and lower shift.
    """
    if not templates:
        raise ValueError("At least one template is required")
    sequence = np.atleast_2d(np.asarray(sequence, dtype=np.float64))
    allowed = None if shifts is None else set(int(w) for w in shifts)

    best: Optional[TemplateMatch] = None
    fitted = False
    for template in templates:
        if len(sequence) < template.length:
            continue
        fitted = True
        matcher = TemplateMatcher(template)
        for vector in sequence:
            completed = matcher.push(vector)
            if completed is None:
                continue
            shift, theta = completed
            if allowed is not None and shift not in allowed:
                continue
            if best is None or theta > best.similarity:
                best = TemplateMatch(template.code, shift, theta, template.length)
    if not fitted:
        shortest = min(template.length for template in templates)
        raise SequenceTooShortError(
            f"Sequence of {len(sequence)} vectors is shorter than the "
            f"shortest template ({shortest})"
        )
    if best is None:
        raise ValueError("No allowed shift fits the sequence")
    return best


def feature_sequence(
    frames: np.ndarray, points: np.ndarray, p: AnomalyParams
) -> np.ndarray:
    """Feature vectors of every full trailing template_window in a trajectory."""
    window = p.template_window
    rows = []
    for end in range(window, len(frames) + 1):
        features = features_from_arrays(
            frames[end - window:end], points[end - window:end], p.heading_step
        )
        rows.append(feature_vector(features))
    return np.array(rows)


def _canonical_scripts(p: AnomalyParams) -> Dict[AnomalyCode, np.ndarray]:
    """Noise-free trajectories whose last windows define each template."""
    n = p.template_window + p.template_length - 1
    t = np.arange(n, dtype=np.float64)

    still = np.zeros((n, 2))
    run = np.column_stack([8.0 * t, np.zeros(n)])

    angle = 2 * np.pi * t / 80.0
    circle = np.column_stack([30.0 * np.cos(angle), 30.0 * np.sin(angle)])

    jump = np.column_stack([2.0 * t, np.zeros(n)])
    duration = 12
    begin = p.template_length
    k = np.arange(duration + 1)
    jump[begin:begin + duration + 1, 1] -= 40.0 * np.sin(np.pi * k / duration) ** 2

    return {
        AnomalyCode.LOITER: still,
        AnomalyCode.FAST: run,
        AnomalyCode.CIRCULAR: circle,
        AnomalyCode.JUMP: jump,
    }


def builtin_templates(p: Optional[AnomalyParams] = None) -> List[AnomalyTemplate]:
    p = p or AnomalyParams()
    templates = []
    for code, points in _canonical_scripts(p).items():
        frames = np.arange(len(points))
        rows = feature_sequence(frames, points, p)[-p.template_length:]
        templates.append(AnomalyTemplate(code, rows, name=f"builtin-{code.label}"))
    return templates


def load_templates(path: Union[str, Path]) -> List[AnomalyTemplate]:
    """
    Load templates from YAML:

        templates:
          - name: pacing
            code: loiter
            profile: [[...], [...]]
    """
    with open(path, "r") as handle:
        data = yaml.safe_load(handle) or {}
    entries = data.get("templates", []) if isinstance(data, dict) else data
    if not isinstance(entries, list):
        raise ValueError(f"{path}: 'templates' must be a list")
    templates = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict) or "code" not in entry or "profile" not in entry:
            raise ValueError(f"{path}: template {index} needs 'code' and 'profile'")
        templates.append(
            AnomalyTemplate.from_rows(
                entry["code"], entry["profile"], name=str(entry.get("name", index))
            )
        )
    return templates


__all__ = [
    "AnomalyTemplate",
    "FEATURE_SCALE",
    "SequenceTooShortError",
    "TemplateMatch",
    "TemplateMatcher",
    "builtin_templates",
    "feature_sequence",
    "feature_vector",
    "load_templates",
    "match_templates",
]
