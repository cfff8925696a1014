"""
Pipeline configuration.

PipelineConfig groups one dataclass per concern. Values come from the
built-in defaults, then a YAML file, then EDGEWATCH_<SECTION>__<FIELD>
environment variables, then explicit command-line flags.
"""

from dataclasses import MISSING, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union
import logging
import os

import yaml

from edgewatch.alerting.sinks import AlertingConfig
from edgewatch.anomaly.params import AnomalyParams
from edgewatch.appearance.encoders import ENCODERS, EncoderSpec, parse_encoder_size
from edgewatch.association import AssociationConfig
from edgewatch.evaluation.timing import TimingModel
from edgewatch.ingestion.builtin import SCENARIOS, SUITE_NAME
from edgewatch.motion import MotionConfig


logger = logging.getLogger(__name__)

ENV_PREFIX = "EDGEWATCH_"
STDIN = "-"


class ConfigError(ValueError):
    """Raised for any invalid configuration value or file."""


@dataclass(frozen=True)
class InputConfig:
    """
    Where frames come from: a detection file (with its descriptor sidecar)
    or a scenario, either a built-in name, a scenario YAML, or "suite".
    """

    detections: Optional[str] = None
    descriptors: Optional[str] = None
    scenario: Optional[str] = None
    labels: Optional[str] = None
    templates: Optional[str] = None
    nms_overlap: float = 0.3
    chunksize: int = 1000


@dataclass(frozen=True)
class OutputConfig:
    output_dir: str = "output"
    track_log: str = "tracks.csv"
    event_log: str = "events.csv"
    sweep_table: str = "sweep.csv"
    bench_report: str = "bench.yaml"
    flush_frames: int = 50

    def path(self, name: str) -> Path:
        target = Path(getattr(self, name))
        return target if target.is_absolute() else Path(self.output_dir) / target


SECTIONS: Dict[str, type] = {
    "input": InputConfig,
    "output": OutputConfig,
    "motion": MotionConfig,
    "association": AssociationConfig,
    "encoder": EncoderSpec,
    "anomaly": AnomalyParams,
    "alerting": AlertingConfig,
    "timing": TimingModel,
}
TOP_LEVEL = ("seed", "workers", "plugins")


@dataclass(frozen=True)
class PipelineConfig:
    input: InputConfig = field(default_factory=InputConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    association: AssociationConfig = field(default_factory=AssociationConfig)
    encoder: EncoderSpec = field(default_factory=EncoderSpec)
    anomaly: AnomalyParams = field(default_factory=AnomalyParams)
    alerting: AlertingConfig = field(default_factory=AlertingConfig)
    timing: TimingModel = field(default_factory=TimingModel)
    seed: int = 0
    workers: int = 1
    plugins: Tuple[str, ...] = ()

    @classmethod
    def load(
        cls,
        path: Optional[Union[str, Path]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "PipelineConfig":
        """Defaults, then the YAML file (if any), then environment overrides."""
        data: Dict[str, Any] = {}
        if path is not None:
            data = cls._read_yaml(path)
        data = apply_env_overrides(data, os.environ if environ is None else environ)
        return cls.from_dict(data)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "PipelineConfig":
        return cls.from_dict(cls._read_yaml(path))

    @staticmethod
    def _read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
        try:
            with open(path, "r") as handle:
                data = yaml.safe_load(handle)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"Config file {path} is not valid YAML: {exc}") from exc
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must be a mapping with top-level keys")
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("Config must be a mapping with top-level keys")
        unknown = sorted(set(data) - set(SECTIONS) - set(TOP_LEVEL))
        if unknown:
            raise ConfigError(
                f"Unknown config key(s): {', '.join(unknown)}. "
                f"Supported: {', '.join(list(SECTIONS) + list(TOP_LEVEL))}"
            )
        values: Dict[str, Any] = {
            name: cls._parse_section(name, section_cls, data.get(name))
            for name, section_cls in SECTIONS.items()
        }
        values["seed"] = cls._parse_int("seed", data.get("seed", 0))
        values["workers"] = cls._parse_int("workers", data.get("workers", 1))
        values["plugins"] = cls._parse_plugins(data.get("plugins", ()))
        return cls(**values)

    @staticmethod
    def _parse_section(name: str, section_cls: type, raw: Any):
        if raw is None:
            return section_cls()
        if not isinstance(raw, Mapping):
            raise ConfigError(f"'{name}' must be a mapping")
        known = {f.name: f for f in fields(section_cls)}
        unknown = sorted(set(raw) - set(known))
        if unknown:
            raise ConfigError(
                f"Unknown key(s) in '{name}': {', '.join(unknown)}. "
                f"Supported: {', '.join(known)}"
            )
        values = {
            key: _coerce(f"{name}.{key}", value, _default_of(known[key]))
            for key, value in raw.items()
        }
        return section_cls(**values)

    @staticmethod
    def _parse_int(key: str, value: Any) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
        return value

    @staticmethod
    def _parse_plugins(value: Any) -> Tuple[str, ...]:
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
            raise ConfigError("'plugins' must be a list of module paths")
        return tuple(value)

    def override(self, section: Optional[str], **values: Any) -> "PipelineConfig":
        """
        Replace fields of one section, or top-level fields when section is
        None. None values are ignored so unset command-line flags leave the
        configuration alone.
        """
        values = {key: value for key, value in values.items() if value is not None}
        if not values:
            return self
        if section is None:
            unknown = sorted(set(values) - set(TOP_LEVEL))
            if unknown:
                raise ConfigError(f"Unknown setting(s): {', '.join(unknown)}")
            return replace(self, **values)
        if section not in SECTIONS:
            raise ConfigError(f"Unknown config section '{section}'")
        current = getattr(self, section)
        known = {f.name: f for f in fields(current)}
        coerced = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"Unknown key '{section}.{key}'")
            coerced[key] = _coerce(f"{section}.{key}", value, _default_of(known[key]))
        return replace(self, **{section: replace(current, **coerced)})

    def validate(self, require_input: bool = True) -> List[str]:
        """
        Every range check plus input file existence. Returns messages;
        empty means valid.
        """
        errors: List[str] = []
        for name in ("association", "anomaly", "alerting", "timing"):
            errors.extend(f"{name}: {message}" for message in getattr(self, name).validate())
        for f in fields(self.motion):
            value = getattr(self.motion, f.name)
            if not value > 0:
                errors.append(f"motion: {f.name} must be positive, got {value}")
        if self.encoder.name not in ENCODERS:
            errors.append(
                f"encoder: unknown encoder '{self.encoder.name}'. "
                f"Registered encoders: {', '.join(sorted(ENCODERS))}"
            )
        if not 0.0 <= self.input.nms_overlap <= 1.0:
            errors.append(f"input: nms_overlap must lie in [0, 1], got {self.input.nms_overlap}")
        if self.input.chunksize < 1:
            errors.append(f"input: chunksize must be >= 1, got {self.input.chunksize}")
        if self.output.flush_frames < 1:
            errors.append(f"output: flush_frames must be >= 1, got {self.output.flush_frames}")
        if self.workers < 1:
            errors.append(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            errors.append(f"seed must be >= 0, got {self.seed}")
        errors.extend(self._validate_input(require_input))
        return errors

    def _validate_input(self, require_input: bool) -> List[str]:
        errors: List[str] = []
        source = self.input
        if source.detections and source.scenario:
            errors.append("input: set either detections or scenario, not both")
        if require_input and not source.detections and not source.scenario:
            errors.append("input: no frames to process (set detections or scenario)")
        if source.detections:
            if source.detections != STDIN and not Path(source.detections).is_file():
                errors.append(f"input: detection file not found: {source.detections}")
            if not source.descriptors:
                errors.append(
                    "input: detection files carry no appearance; a descriptor "
                    "sidecar (descriptors) is required"
                )
        if source.scenario and source.scenario not in SCENARIOS and source.scenario != SUITE_NAME:
            if not Path(source.scenario).is_file():
                errors.append(
                    f"input: scenario '{source.scenario}' is neither a file nor a "
                    f"built-in scenario ({', '.join(sorted(SCENARIOS))}, {SUITE_NAME})"
                )
        for name in ("descriptors", "labels", "templates"):
            path = getattr(source, name)
            if path and not Path(path).is_file():
                errors.append(f"input: {name} file not found: {path}")
        return errors

    def check(self, require_input: bool = True) -> "PipelineConfig":
        errors = self.validate(require_input)
        if errors:
            raise ConfigError("; ".join(errors))
        return self


def _default_of(f) -> Any:
    if f.default is not MISSING:
        return f.default
    if f.default_factory is not MISSING:
        return f.default_factory()
    return None


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Coerce value to the type of the field default, naming key on failure."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number, got {value!r}")
        return float(value)
    if key == "encoder.input_size":
        try:
            if isinstance(value, str):
                return parse_encoder_size(value)
            height, width = value
            return parse_encoder_size(f"{int(height)}x{int(width)}")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"'{key}': {exc}") from None
    if isinstance(default, tuple):
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"'{key}' must be a list, got {value!r}")
        return tuple(value)
    if default is None or isinstance(default, str):
        if value is not None and not isinstance(value, str):
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return str(value)
            raise ConfigError(f"'{key}' must be a string, got {value!r}")
        return value
    return value


def apply_env_overrides(data: Mapping[str, Any], environ: Mapping[str, str]) -> Dict[str, Any]:
    """
    Merge EDGEWATCH_<SECTION>__<FIELD> variables into a raw config mapping.
    Values are parsed as YAML scalars so numbers and booleans keep their type.
    """
    merged: Dict[str, Any] = {
        key: dict(value) if isinstance(value, Mapping) else value
        for key, value in data.items()
    }
    for variable in sorted(environ):
        if not variable.startswith(ENV_PREFIX):
            continue
        path = variable[len(ENV_PREFIX):].lower()
        try:
            value = yaml.safe_load(environ[variable])
        except yaml.YAMLError as exc:
            raise ConfigError(f"{variable}: cannot parse value ({exc})") from exc
        if "__" in path:
            section, key = path.split("__", 1)
            if section not in SECTIONS:
                raise ConfigError(
                    f"{variable}: unknown section '{section}'. "
                    f"Supported: {', '.join(SECTIONS)}"
                )
            target = merged.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigError(f"'{section}' must be a mapping")
            target[key] = value
        elif path in TOP_LEVEL:
            merged[path] = value
        else:
            raise ConfigError(f"{variable}: unknown setting '{path}'")
        logger.debug("Config override from %s", variable)
    return merged


__all__ = [
    "ConfigError",
    "InputConfig",
    "OutputConfig",
    "PipelineConfig",
    "SECTIONS",
    "STDIN",
    "apply_env_overrides",
]
