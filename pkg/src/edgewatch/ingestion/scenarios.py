"""
Synthetic scenario generator.

A ScenarioSpec lists actor scripts (walk, loiter, run, circle, jump,
gather, disperse). Each script yields true box-center trajectories plus the
per-frame labels of the anomaly it enacts. Generation adds position noise and
per-actor appearance descriptors, all drawn from one seeded generator.
"""

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union
import math

import numpy as np
import yaml

from edgewatch.anomaly.events import AnomalyCode
from edgewatch.anomaly.params import AnomalyParams
from edgewatch.geometry import DESCRIPTOR_DIM, BoundingBox, Detection
from edgewatch.ingestion.detections import FrameDetections


class ScenarioError(ValueError):
    """Raised for invalid scenario specs."""


@dataclass(frozen=True)
class ActorScript:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioSpec:
    name: str = "scenario"
    duration: int = 200
    actors: List[ActorScript] = field(default_factory=list)
    width: float = 960.0
    height: float = 720.0
    box_width: float = 40.0
    box_height: float = 100.0
    position_noise: float = 0.5
    descriptor_noise: float = 0.05
    confidence_range: Tuple[float, float] = (0.6, 1.0)
    seed: Optional[int] = None
    labeling: AnomalyParams = field(default_factory=AnomalyParams)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "ScenarioSpec":
        with open(path, "r") as handle:
            data = yaml.safe_load(handle)
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: scenario file must be a mapping")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioSpec":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ScenarioError(f"Unknown scenario keys: {', '.join(unknown)}")
        actors = cls._parse_actors(data.pop("actors", []))
        labeling = cls._parse_labeling(data.pop("labeling", None) or {})
        if "confidence_range" in data:
            data["confidence_range"] = tuple(data["confidence_range"])
        spec = cls(actors=actors, labeling=labeling, **data)
        spec.validate()
        return spec

    @staticmethod
    def _parse_actors(raw) -> List[ActorScript]:
        if not isinstance(raw, list):
            raise ScenarioError("actors must be a list")
        actors = []
        for index, entry in enumerate(raw):
            if not isinstance(entry, dict) or "kind" not in entry:
                raise ScenarioError(f"actor {index} must be a mapping with a 'kind'")
            params = {key: value for key, value in entry.items() if key != "kind"}
            actors.append(ActorScript(str(entry["kind"]), params))
        return actors

    @staticmethod
    def _parse_labeling(raw) -> AnomalyParams:
        if not isinstance(raw, dict):
            raise ScenarioError("labeling must be a mapping")
        try:
            return AnomalyParams(**raw)
        except TypeError as exc:
            raise ScenarioError(f"Invalid labeling parameters: {exc}") from exc

    def validate(self) -> None:
        if self.duration < 1:
            raise ScenarioError(f"duration must be >= 1, got {self.duration}")
        if self.width <= 0 or self.height <= 0:
            raise ScenarioError("scene width and height must be positive")
        if self.box_width <= 0 or self.box_height <= 0:
            raise ScenarioError("box_width and box_height must be positive")
        if self.position_noise < 0 or self.descriptor_noise < 0:
            raise ScenarioError("noise levels must be non-negative")
        low, high = self.confidence_range
        if not 0.0 <= low <= high <= 1.0:
            raise ScenarioError(f"confidence_range must lie in [0, 1], got {self.confidence_range}")
        for actor in self.actors:
            if actor.kind not in SCRIPTS:
                raise ScenarioError(
                    f"Unknown actor kind '{actor.kind}'. Supported kinds: "
                    f"{', '.join(sorted(SCRIPTS))}"
                )


@dataclass
class Scenario:
    spec: ScenarioSpec
    seed: int
    frames: List[FrameDetections]
    actor_ids: List[List[int]]
    class_labels: Dict[AnomalyCode, np.ndarray]

    @property
    def duration(self) -> int:
        return self.spec.duration

    @property
    def labels(self) -> np.ndarray:
        """Per-frame ground truth: any anomaly class active."""
        merged = np.zeros(self.duration, dtype=bool)
        for mask in self.class_labels.values():
            merged |= mask
        return merged

    @property
    def codes(self) -> List[AnomalyCode]:
        return [code for code, mask in self.class_labels.items() if mask.any()]


@dataclass
class ScriptOutput:
    positions: np.ndarray
    labels: Dict[AnomalyCode, np.ndarray] = field(default_factory=dict)


def _vector(params: Dict[str, Any], key: str, default=None) -> np.ndarray:
    value = params.get(key, default)
    if value is None:
        raise ScenarioError(f"actor parameter '{key}' is required")
    array = np.asarray(value, dtype=np.float64)
    if array.shape != (2,) or not np.all(np.isfinite(array)):
        raise ScenarioError(f"actor parameter '{key}' must be a pair of numbers, got {value}")
    return array


def _number(params: Dict[str, Any], key: str, default=None) -> float:
    value = params.get(key, default)
    if value is None:
        raise ScenarioError(f"actor parameter '{key}' is required")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"actor parameter '{key}' must be a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ScenarioError(f"actor parameter '{key}' must be finite")
    return number


def _time(spec: ScenarioSpec) -> np.ndarray:
    return np.arange(spec.duration, dtype=np.float64)


def _walk(params, spec: ScenarioSpec) -> ScriptOutput:
    start, velocity = _vector(params, "start"), _vector(params, "velocity")
    t = _time(spec)
    return ScriptOutput((start + velocity * t[:, None])[None])


def _loiter(params, spec: ScenarioSpec) -> ScriptOutput:
    start = _vector(params, "start")
    velocity = _vector(params, "velocity", (0.0, 0.0))
    walk_frames = int(_number(params, "walk_frames", 0))
    t = np.minimum(_time(spec), walk_frames)
    positions = start + velocity * t[:, None]
    mask = _time(spec) >= walk_frames + spec.labeling.still_frames - 1
    return ScriptOutput(positions[None], {AnomalyCode.LOITER: mask})


def _run(params, spec: ScenarioSpec) -> ScriptOutput:
    start = _vector(params, "start")
    direction = _vector(params, "direction", (1.0, 0.0))
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ScenarioError("run direction must be non-zero")
    segments = sorted((int(frame), float(speed)) for frame, speed in params.get("speeds", [[0, 2.0]]))
    speed = np.zeros(spec.duration)
    for frame, value in segments:
        speed[frame:] = value
    speed[0] = 0.0
    travelled = np.cumsum(speed)
    positions = start + (direction / norm) * travelled[:, None]
    mask = speed > spec.labeling.abs_speed
    return ScriptOutput(positions[None], {AnomalyCode.FAST: mask})


def _circle(params, spec: ScenarioSpec) -> ScriptOutput:
    center = _vector(params, "center")
    radius = _number(params, "radius", 30.0)
    period = _number(params, "period", 80.0)
    start_frame = int(_number(params, "start_frame", 0))
    phase = math.radians(_number(params, "phase_deg", -90.0))
    if radius <= 0 or period <= 0:
        raise ScenarioError("circle radius and period must be positive")

    t = _time(spec)
    omega = 2 * math.pi / period
    angle = phase + omega * np.maximum(t - start_frame, 0.0)
    positions = center + radius * np.column_stack([np.cos(angle), np.sin(angle)])

    # straight walk-in along the tangent, arriving at the circle on start_frame
    before = t < start_frame
    tangent = np.array([-math.sin(phase), math.cos(phase)])
    lead = (start_frame - t[before]) * omega * radius
    positions[before] = positions[start_frame if start_frame < len(t) else -1] - lead[:, None] * tangent

    p = spec.labeling
    # headings trail the path by half a merged step
    step_frames = math.ceil(p.heading_step / (omega * radius))
    onset = start_frame + math.ceil(p.winding_threshold / omega + step_frames / 2)
    return ScriptOutput(positions[None], {AnomalyCode.CIRCULAR: t >= onset})


def _jump(params, spec: ScenarioSpec) -> ScriptOutput:
    start, velocity = _vector(params, "start"), _vector(params, "velocity")
    height = _number(params, "height", 40.0)
    duration = int(_number(params, "duration", 12))
    t = _time(spec)
    positions = start + velocity * t[:, None]
    mask = np.zeros(spec.duration, dtype=bool)
    for t0 in params.get("jump_frames", []):
        t0 = int(t0)
        k = t - t0
        inside = (k >= 0) & (k <= duration)
        positions[inside, 1] -= height * np.sin(np.pi * k[inside] / duration) ** 2
        mask |= (k >= 1) & (k <= duration - 1)
    return ScriptOutput(positions[None], {AnomalyCode.JUMP: mask})


def _group_positions(center, members: int, distance: np.ndarray, phase_deg: float) -> np.ndarray:
    angles = np.radians(phase_deg + 360.0 * np.arange(members) / members)
    unit = np.column_stack([np.cos(angles), np.sin(angles)])
    return center + distance[None, :, None] * unit[:, None, :]


def _group_labels(
    positions: np.ndarray, p: AnomalyParams, duration: int, gathering: bool
) -> np.ndarray:
    """
    Frames where the scripted group is tight and closing in (gathering) or
    opens out of a tight start (dispersing). Judged from the member distances
    to the group centroid at every eval_stride frame and held until the next.
    """
    mask = np.zeros(duration, dtype=bool)
    if len(positions) < p.min_group:
        return mask
    spread = np.linalg.norm(positions - positions.mean(axis=0), axis=2)
    lag = p.converge_frames
    first = -(-lag // p.eval_stride) * p.eval_stride
    for frame in range(first, duration, p.eval_stride):
        before, now = spread[:, frame - lag], spread[:, frame]
        if gathering:
            tight, change = now, before - now
        else:
            tight, change = before, now - before
        if tight.max() <= p.meet_radius and change.min() >= p.min_approach:
            mask[frame: frame + p.eval_stride] = True
    return mask


def _gather(params, spec: ScenarioSpec) -> ScriptOutput:
    center = _vector(params, "center")
    members = int(_number(params, "members", 4))
    start = _number(params, "start_distance", 228.0)
    end = _number(params, "end_distance", 35.0)
    t = _time(spec)
    distance = start + (end - start) * t / max(spec.duration - 1, 1)
    positions = _group_positions(center, members, distance, _number(params, "phase_deg", -90.0))
    mask = _group_labels(positions, spec.labeling, spec.duration, gathering=True)
    return ScriptOutput(positions, {AnomalyCode.GATHER: mask})


def _disperse(params, spec: ScenarioSpec) -> ScriptOutput:
    center = _vector(params, "center")
    members = int(_number(params, "members", 4))
    radius = _number(params, "radius", 35.0)
    hold = _number(params, "hold_frames", 62)
    speed = _number(params, "speed", 1.0)
    t = _time(spec)
    distance = radius + speed * np.maximum(t - hold, 0.0)
    positions = _group_positions(center, members, distance, _number(params, "phase_deg", -90.0))
    mask = _group_labels(positions, spec.labeling, spec.duration, gathering=False)
    return ScriptOutput(positions, {AnomalyCode.DISPERSE: mask})


SCRIPTS: Dict[str, Callable[[Dict[str, Any], ScenarioSpec], ScriptOutput]] = {
    "walk": _walk,
    "loiter": _loiter,
    "run": _run,
    "circle": _circle,
    "jump": _jump,
    "gather": _gather,
    "disperse": _disperse,
}


def script_positions(spec: ScenarioSpec) -> Tuple[np.ndarray, Dict[AnomalyCode, np.ndarray]]:
    """Noise-free (actors, frames, 2) centers and merged per-class labels."""
    outputs = [SCRIPTS[actor.kind](actor.params, spec) for actor in spec.actors]
    if outputs:
        positions = np.concatenate([output.positions for output in outputs])
    else:
        positions = np.zeros((0, spec.duration, 2))
    labels = {code: np.zeros(spec.duration, dtype=bool) for code in AnomalyCode}
    for output in outputs:
        for code, mask in output.labels.items():
            labels[code] |= mask
    return positions, labels


def _check_bounds(spec: ScenarioSpec, positions: np.ndarray) -> None:
    half_w, half_h = spec.box_width / 2, spec.box_height / 2
    for actor, track in enumerate(positions):
        u, v = track[:, 0], track[:, 1]
        outside = (u - half_w < 0) | (u + half_w > spec.width) | (v - half_h < 0) | (v + half_h > spec.height)
        if outside.any():
            frame = int(np.argmax(outside))
            raise ScenarioError(
                f"Scenario '{spec.name}': actor {actor} leaves the "
                f"{spec.width:g}x{spec.height:g} scene at frame {frame}"
            )


def generate_scenario(spec: ScenarioSpec, seed: Optional[int] = None) -> Scenario:
    """
    Deterministic for a fixed seed. Each actor gets a random unit base
    descriptor; each frame perturbs it with uniform noise of at most
    descriptor_noise per component before re-normalizing.
    """
    spec.validate()
    if seed is None:
        seed = spec.seed if spec.seed is not None else 0
    positions, labels = script_positions(spec)
    _check_bounds(spec, positions)

    rng = np.random.default_rng(seed)
    n_actors, duration = len(positions), spec.duration
    base = rng.standard_normal((n_actors, DESCRIPTOR_DIM))
    base /= np.linalg.norm(base, axis=1, keepdims=True)
    jitter = rng.normal(0.0, spec.position_noise, (duration, n_actors, 2))
    wobble = rng.uniform(
        -spec.descriptor_noise, spec.descriptor_noise, (duration, n_actors, DESCRIPTOR_DIM)
    )
    confidence = rng.uniform(*spec.confidence_range, (duration, n_actors))

    descriptors = base[None] + wobble
    descriptors /= np.linalg.norm(descriptors, axis=2, keepdims=True)
    centers = positions.transpose(1, 0, 2) + jitter

    frames: List[FrameDetections] = []
    actor_ids: List[List[int]] = []
    for t in range(duration):
        dets = []
        for actor in range(n_actors):
            u, v = centers[t, actor]
            box = BoundingBox(
                float(u - spec.box_width / 2),
                float(v - spec.box_height / 2),
                spec.box_width,
                spec.box_height,
            )
            dets.append(Detection(t, box, float(confidence[t, actor]), descriptors[t, actor]))
        frames.append((t, dets))
        actor_ids.append(list(range(n_actors)))
    return Scenario(spec, seed, frames, actor_ids, labels)


__all__ = [
    "ActorScript",
    "SCRIPTS",
    "Scenario",
    "ScenarioError",
    "ScenarioSpec",
    "generate_scenario",
    "script_positions",
]
