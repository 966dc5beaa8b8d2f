import json
from pathlib import Path

import pytest

from gsan.config import LayerConfig, ModelConfig, config_dict, get_paths, load_run_config, validate_run_config
from gsan.errors import ConfigError
from gsan.settings import Settings


def test_shipped_configs_are_valid():
    configs = sorted(Path(get_paths().configs_dir).glob("*.json"))
    assert {p.stem for p in configs} >= {"synthetic_flow", "cyclic_flow", "mdi", "simplex_prediction"}
    for path in configs:
        config = load_run_config(path)
        assert config.task == path.stem


def test_dataset_defaults_follow_the_task():
    config = validate_run_config({"task": "mdi", "dataset": {}})
    assert config.dataset.kind == "mdi"
    assert config.dataset.miss_fraction == pytest.approx(0.1)


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError) as exc:
        validate_run_config({"task": "mdi", "dataset": {}, "modle": {}})
    assert "modle" in exc.value.message


def test_out_of_range_miss_fraction_names_the_field():
    with pytest.raises(ConfigError) as exc:
        validate_run_config({"task": "mdi", "dataset": {"miss_fraction": 1.5}})
    assert "miss_fraction" in exc.value.message
    assert exc.value.to_dict()["error"]["type"] == "invalid_config"


def test_empty_active_orders_are_rejected():
    with pytest.raises(ConfigError):
        validate_run_config({"task": "mdi", "dataset": {}, "model": {"active_orders": []}})


def test_overrides_replace_file_values(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"task": "cyclic_flow", "dataset": {"n_traj": 10}, "seed": 1}))
    config = load_run_config(path, {"seed": 9, "out": str(tmp_path / "out"), "task": None})
    assert config.seed == 9
    assert config.task == "cyclic_flow"
    assert config.resolved_out() == str(tmp_path / "out")


def test_task_override_alone_is_enough():
    config = load_run_config(None, {"task": "simplex_prediction"})
    assert config.dataset.kind == "simplex_prediction"


def test_malformed_json_is_a_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_run_config(path)
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.json")


def test_config_dict_round_trips():
    config = validate_run_config({"task": "cyclic_flow", "dataset": {"n_rings": 3}})
    assert validate_run_config(config_dict(config)) == config


def test_layer_widths_chain():
    model = ModelConfig(layers=[LayerConfig(F_out=4, heads=3), LayerConfig(F_out=2, head_combine="average", heads=2)])
    first, second = model.resolved_layers(5)
    assert (first.F_in, first.width_out) == (5, 12)
    assert (second.F_in, second.width_out) == (12, 2)


def test_harmonic_step_per_order():
    layer = LayerConfig(J=3, harmonic_eps={1: 0.25})
    assert layer.eps_for(1) == 0.25
    assert layer.eps_for(0) == "auto"
    assert layer.projector_steps == 3
    assert LayerConfig(J=3, harmonic_J=50).projector_steps == 50


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("GSAN_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("GSAN_PROGRESS", "false")
    settings = Settings()
    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.PROGRESS is False
