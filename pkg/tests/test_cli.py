import json

import pandas as pd
import pytest

from gsan.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, build_parser, main

TINY = {
    "task": "cyclic_flow",
    "dataset": {"n_rings": 1, "ring_size": 6, "n_traj": 12},
    "model": {
        "family": "gsan",
        "layers": [{"J": 2, "F_out": 3, "heads": 2, "nonlinearity": "tanh", "signed_masking": True}],
        "readout": {"kind": "complex", "hidden": 4, "n_classes": 2, "unflip_orientation": True},
    },
    "training": {"lr": 0.01, "epochs": 2, "patience": 5, "batch_size": 4},
    "seed": 3,
}


@pytest.fixture()
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return path


def test_parser_knows_every_command():
    parser = build_parser()
    for argv in (["generate", "--task", "mdi"], ["train"], ["eval", "--checkpoint", "x"], ["propcheck", "--trials", "1"]):
        assert parser.parse_args(argv).command == argv[0]


def test_generate_writes_an_archive(tmp_path, tiny_config, capsys):
    out = tmp_path / "run"
    assert main(["generate", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["task"] == "cyclic_flow"
    assert summary["betti"][1] == 1
    assert (out / "dataset" / "meta.json").exists()


def test_train_then_eval(tmp_path, tiny_config):
    out = tmp_path / "run"
    assert main(["train", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    for name in ("metrics.json", "metrics.csv", "attention_histograms.csv"):
        assert (out / name).exists()
    assert (out / "checkpoint" / "manifest.json").exists()
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["wall_time_seconds"] > 0.0
    assert sum(metrics["parameter_breakdown"].values()) == metrics["parameter_store_size"]
    assert len(pd.read_csv(out / "metrics.csv")) == len(metrics["history"])

    assert main(["eval", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    evaluated = json.loads((out / "eval.json").read_text())
    assert evaluated["test"] == metrics["test"]


def test_runs_are_reproducible(tmp_path, tiny_config):
    reports = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["train", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
        payload = json.loads((out / "metrics.json").read_text())
        payload.pop("config")
        payload.pop("wall_time_seconds")
        reports.append(payload)
        assert (out / "checkpoint" / "tensors.bin").read_bytes() == (tmp_path / "a" / "checkpoint" / "tensors.bin").read_bytes()
    assert reports[0] == reports[1]


def test_invalid_config_exits_with_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"task": "mdi", "dataset": {"miss_fraction": 1.5}}))
    assert main(["generate", "--config", str(path), "--out", str(tmp_path / "run")]) == EXIT_INVALID
    assert not (tmp_path / "run").exists()


def test_eval_without_checkpoint_fails(tmp_path, tiny_config):
    assert main(["eval", "--config", str(tiny_config), "--out", str(tmp_path / "empty")]) == EXIT_FAILED


def test_vacuous_propcheck_exits_with_two(tmp_path):
    assert main(["propcheck", "--trials", "0", "--out", str(tmp_path)]) == EXIT_INVALID
    assert json.loads((tmp_path / "propcheck.json").read_text())["status"] == "vacuous"


def test_propcheck_negative_control_fails():
    assert main(["propcheck", "--trials", "1", "--check", "dirac_identity", "--fault", "b2_sign"]) == EXIT_FAILED
    assert main(["propcheck", "--trials", "1", "--check", "dirac_identity"]) == EXIT_OK


def test_train_regenerates_an_archive_from_another_seed(tmp_path, tiny_config):
    out = tmp_path / "run"
    assert main(["generate", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    assert main(["train", "--config", str(tiny_config), "--out", str(out), "--seed", "4"]) == EXIT_OK
    meta = json.loads((out / "dataset" / "meta.json").read_text())
    assert meta["seed"] == 4
    assert json.loads((out / "metrics.json").read_text())["seed"] == 4


def test_train_regenerates_an_archive_with_other_params(tmp_path, tiny_config):
    out = tmp_path / "run"
    assert main(["generate", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    bigger = tmp_path / "bigger.json"
    bigger.write_text(json.dumps({**TINY, "dataset": {**TINY["dataset"], "n_traj": 16}}))
    assert main(["train", "--config", str(bigger), "--out", str(out)]) == EXIT_OK
    meta = json.loads((out / "dataset" / "meta.json").read_text())
    assert meta["params"]["n_traj"] == 16
    assert meta["n_samples"] == 16


def test_eval_rejects_an_archive_from_another_run(tmp_path, tiny_config):
    out = tmp_path / "run"
    assert main(["train", "--config", str(tiny_config), "--out", str(out)]) == EXIT_OK
    assert main(["generate", "--config", str(tiny_config), "--out", str(out), "--seed", "9"]) == EXIT_OK
    assert main(["eval", "--config", str(tiny_config), "--out", str(out)]) == EXIT_INVALID
