"""
Built-in scenario pack.
"""

from pathlib import Path
from typing import Any, Dict, List, Union
import copy

from edgewatch.anomaly.events import AnomalyCode
from edgewatch.ingestion.scenarios import ScenarioError, ScenarioSpec


WALKERS: List[Dict[str, Any]] = [
    {"kind": "walk", "start": [80, 100], "velocity": [2.0, 0.0]},
    {"kind": "walk", "start": [880, 600], "velocity": [-1.8, -0.2]},
    {"kind": "walk", "start": [100, 640], "velocity": [1.5, 0.0]},
]


def _with_walkers(*actors: Dict[str, Any]) -> List[Dict[str, Any]]:
    return copy.deepcopy(WALKERS) + list(actors)


SCENARIOS: Dict[str, Dict[str, Any]] = {
    "normal": {
        "duration": 200,
        "actors": _with_walkers(
            {"kind": "walk", "start": [700, 150], "velocity": [-1.5, 0.5]},
            {"kind": "walk", "start": [300, 500], "velocity": [1.2, -0.3]},
        ),
    },
    "loiter": {
        "duration": 200,
        "actors": _with_walkers(
            {"kind": "loiter", "start": [200, 380], "velocity": [1.5, 0.0], "walk_frames": 40},
        ),
    },
    "fast": {
        "duration": 200,
        "actors": _with_walkers(
            {
                "kind": "run",
                "start": [100, 300],
                "direction": [1.0, 0.1],
                "speeds": [[0, 1.5], [60, 8.0], [100, 1.5]],
            },
        ),
    },
    "circular": {
        "duration": 200,
        "actors": _with_walkers(
            {"kind": "circle", "center": [480, 380], "radius": 30, "period": 80, "start_frame": 40},
        ),
    },
    "jump": {
        "duration": 200,
        "actors": _with_walkers(
            {
                "kind": "jump",
                "start": [150, 400],
                "velocity": [2.0, 0.0],
                "jump_frames": [50, 100, 150],
                "height": 40,
                "duration": 12,
            },
        ),
    },
    "gather": {
        "duration": 200,
        "actors": _with_walkers(
            {"kind": "gather", "center": [480, 380], "members": 4,
             "start_distance": 228, "end_distance": 35},
        ),
    },
    "disperse": {
        "duration": 200,
        "actors": _with_walkers(
            {"kind": "disperse", "center": [480, 380], "members": 4,
             "radius": 35, "hold_frames": 62, "speed": 1.0},
        ),
    },
    "crossing": {
        "duration": 100,
        "actors": [
            {"kind": "walk", "start": [100, 360], "velocity": [3.0, 0.0]},
            {"kind": "walk", "start": [400, 360], "velocity": [-3.0, 0.0]},
        ],
    },
    "bench": {
        "duration": 1000,
        "actors": [
            {
                "kind": "circle",
                "center": [120 + 180 * (i % 5), 200 + 320 * (i // 5)],
                "radius": 30,
                "period": 60 + 10 * (i % 5),
                "phase_deg": 36 * i,
            }
            for i in range(10)
        ],
    },
}

SCENARIO_CLASSES: Dict[str, AnomalyCode] = {
    "loiter": AnomalyCode.LOITER,
    "fast": AnomalyCode.FAST,
    "circular": AnomalyCode.CIRCULAR,
    "jump": AnomalyCode.JUMP,
    "gather": AnomalyCode.GATHER,
    "disperse": AnomalyCode.DISPERSE,
}

SUITE_NAME = "suite"
SUITE = ["normal", "loiter", "fast", "circular", "jump", "gather", "disperse"]


def get_scenario_spec(name: str) -> ScenarioSpec:
    if name not in SCENARIOS:
        raise ScenarioError(
            f"Unknown scenario '{name}'. Built-in scenarios: "
            f"{', '.join(sorted(SCENARIOS.keys()))}"
        )
    data = copy.deepcopy(SCENARIOS[name])
    data.setdefault("name", name)
    return ScenarioSpec.from_dict(data)


def load_scenario_spec(source: Union[str, Path]) -> ScenarioSpec:
    """A built-in scenario name or a path to a scenario YAML file."""
    if str(source) in SCENARIOS:
        return get_scenario_spec(str(source))
    path = Path(source)
    if not path.is_file():
        raise ScenarioError(
            f"Scenario '{source}' is neither a file nor a built-in scenario "
            f"({', '.join(sorted(SCENARIOS))})"
        )
    return ScenarioSpec.from_yaml(path)


__all__ = [
    "SCENARIOS",
    "SCENARIO_CLASSES",
    "SUITE_NAME",
    "SUITE",
    "get_scenario_spec",
    "load_scenario_spec",
]
