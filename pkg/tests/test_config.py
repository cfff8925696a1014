"""Tests for configuration loading, overrides and validation."""

from pathlib import Path

import pytest

from edgewatch.config import (
    ConfigError,
    PipelineConfig,
    apply_env_overrides,
)


FIXTURES_DIR = Path(__file__).parent / "fixtures"


def test_defaults():
    config = PipelineConfig()
    assert config.association.max_cos_distance == 0.9
    assert config.association.lambda_weight == 0.0
    assert config.encoder.input_size == (64, 32)
    assert config.input.nms_overlap == 0.3
    assert config.alerting.sinks == ("file",)
    assert config.validate(require_input=False) == []


def test_load_yaml_file():
    config = PipelineConfig.load(FIXTURES_DIR / "pipeline_config.yaml", environ={})
    assert config.input.scenario == "loiter"
    assert config.input.nms_overlap == 0.4
    assert config.association.max_cos_distance == 0.6
    assert config.association.i_max == 20
    assert config.association.n_init == 3
    assert config.encoder.input_size == (128, 64)
    assert config.anomaly.still_frames == 60
    assert config.anomaly.templates_enabled is True
    assert config.alerting.sinks == ("file", "stdout")
    assert config.alerting.node_id == 7
    assert config.timing.od_ms == 80.0
    assert config.seed == 3
    assert config.output.path("track_log") == Path("runs/loiter/tracks.csv")
    assert config.validate() == []


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        PipelineConfig.load(tmp_path / "missing.yaml", environ={})
    bad = tmp_path / "bad.yaml"
    bad.write_text("association: [unclosed\n")
    with pytest.raises(ConfigError, match="not valid YAML"):
        PipelineConfig.load(bad, environ={})
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        PipelineConfig.load(listing, environ={})


def test_empty_file_gives_defaults(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert PipelineConfig.load(empty, environ={}) == PipelineConfig()


@pytest.mark.parametrize(
    "data, message",
    [
        ({"tracker": {}}, "Unknown config key"),
        ({"association": {"gate": 3}}, "Unknown key"),
        ({"association": {"i_max": "many"}}, "association.i_max' must be an integer"),
        ({"association": {"lambda_weight": True}}, "must be a number"),
        ({"anomaly": {"rules_enabled": "yes"}}, "true or false"),
        ({"encoder": {"input_size": "big"}}, "encoder.input_size"),
        ({"association": 3}, "must be a mapping"),
        ({"seed": 1.5}, "'seed' must be an integer"),
        ({"plugins": 3}, "plugins"),
    ],
)
def test_from_dict_errors(data, message):
    with pytest.raises(ConfigError, match=message):
        PipelineConfig.from_dict(data)


def test_encoder_size_as_pair():
    config = PipelineConfig.from_dict({"encoder": {"input_size": [128, 64]}})
    assert config.encoder.input_size == (128, 64)
    assert config.encoder.label == "128x64"


def test_env_overrides_take_precedence_over_file():
    environ = {
        "EDGEWATCH_ASSOCIATION__I_MAX": "12",
        "EDGEWATCH_ANOMALY__TEMPLATES_ENABLED": "false",
        "EDGEWATCH_SEED": "5",
        "UNRELATED": "1",
    }
    config = PipelineConfig.load(FIXTURES_DIR / "pipeline_config.yaml", environ=environ)
    assert config.association.i_max == 12
    assert config.association.max_cos_distance == 0.6
    assert config.anomaly.templates_enabled is False
    assert config.seed == 5


def test_env_overrides_without_file():
    config = PipelineConfig.load(environ={"EDGEWATCH_INPUT__SCENARIO": "jump"})
    assert config.input.scenario == "jump"


@pytest.mark.parametrize(
    "variable, message",
    [
        ("EDGEWATCH_TRACKER__I_MAX", "unknown section 'tracker'"),
        ("EDGEWATCH_COLOUR", "unknown setting 'colour'"),
    ],
)
def test_env_override_errors(variable, message):
    with pytest.raises(ConfigError, match=message):
        apply_env_overrides({}, {variable: "1"})


def test_env_override_does_not_mutate_input():
    data = {"association": {"i_max": 5}}
    merged = apply_env_overrides(data, {"EDGEWATCH_ASSOCIATION__I_MAX": "9"})
    assert merged["association"]["i_max"] == 9
    assert data["association"]["i_max"] == 5


def test_override_ignores_unset_values():
    config = PipelineConfig()
    assert config.override("association", max_cos_distance=None) is config
    changed = config.override("association", max_cos_distance=0.5, i_max=10)
    assert (changed.association.max_cos_distance, changed.association.i_max) == (0.5, 10)
    assert config.association.max_cos_distance == 0.9


def test_override_coerces_values():
    config = PipelineConfig().override("alerting", sinks="file, datagram")
    assert config.alerting.sinks == ("file", "datagram")
    config = config.override("encoder", input_size="32x16")
    assert config.encoder.input_size == (32, 16)
    config = config.override(None, seed=9, workers=2)
    assert (config.seed, config.workers) == (9, 2)


def test_override_rejects_unknown_names():
    with pytest.raises(ConfigError, match="Unknown config section"):
        PipelineConfig().override("tracker", i_max=3)
    with pytest.raises(ConfigError, match="Unknown key 'association.gate'"):
        PipelineConfig().override("association", gate=3)
    with pytest.raises(ConfigError, match="Unknown setting"):
        PipelineConfig().override(None, colour="red")


def _errors(**sections):
    config = PipelineConfig()
    for section, values in sections.items():
        config = config.override(section, **values)
    return config.validate()


def test_validate_requires_input():
    assert any("no frames to process" in e for e in PipelineConfig().validate())
    assert PipelineConfig().validate(require_input=False) == []


def test_validate_detection_inputs(tmp_path):
    detections = tmp_path / "dets.csv"
    detections.write_text("")
    errors = _errors(input={"detections": str(detections)})
    assert any("descriptor sidecar" in e for e in errors)

    errors = _errors(input={"detections": str(tmp_path / "nope.csv"), "descriptors": "x.csv"})
    assert any("detection file not found" in e for e in errors)
    assert any("descriptors file not found" in e for e in errors)

    errors = _errors(input={"detections": "-", "descriptors": str(detections)})
    assert errors == []

    errors = _errors(input={"detections": str(detections), "scenario": "loiter"})
    assert any("either detections or scenario" in e for e in errors)


def test_validate_scenario_names():
    assert _errors(input={"scenario": "suite"}) == []
    assert _errors(input={"scenario": "loiter"}) == []
    errors = _errors(input={"scenario": "stampede"})
    assert any("neither a file nor a built-in scenario" in e for e in errors)


@pytest.mark.parametrize(
    "section, values, fragment",
    [
        ("association", {"lambda_weight": 1.5}, "lambda_weight"),
        ("association", {"n_init": 0}, "n_init"),
        ("anomaly", {"still_radius": 0.0}, "still_radius"),
        ("anomaly", {"min_group": 3}, "min_group"),
        ("alerting", {"node_id": 70000}, "node_id"),
        ("timing", {"fe_ms": -1.0}, "fe_ms"),
        ("motion", {"std_weight_position": 0.0}, "std_weight_position"),
        ("encoder", {"name": "resnet"}, "unknown encoder 'resnet'"),
        ("input", {"nms_overlap": 1.5}, "nms_overlap"),
    ],
)
def test_validate_ranges(section, values, fragment):
    config = PipelineConfig().override("input", scenario="loiter").override(section, **values)
    errors = config.validate()
    assert errors
    assert any(fragment in e for e in errors)


def test_check_joins_errors():
    config = PipelineConfig().override("association", lambda_weight=2.0, n_init=0)
    with pytest.raises(ConfigError) as exc_info:
        config.check(require_input=False)
    assert "lambda_weight" in str(exc_info.value)
    assert "; " in str(exc_info.value)


def test_output_paths(tmp_path):
    config = PipelineConfig().override("output", output_dir=str(tmp_path), event_log="/abs/events.csv")
    assert config.output.path("track_log") == tmp_path / "tracks.csv"
    assert config.output.path("event_log") == Path("/abs/events.csv")
