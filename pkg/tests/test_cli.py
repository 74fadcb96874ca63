"""End-to-end CLI behavior: configs, artifacts, commands, exit codes."""
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from qae_anomaly import cli
from qae_anomaly.cli import (ModelArtifact, cmd_eval, cmd_grid, cmd_prepare,
                             cmd_train, load_artifact, load_run_config,
                             save_artifact)
from qae_anomaly.circuits import EncoderConfig
from qae_anomaly.datasets import ScalerParams
from qae_anomaly.errors import ConfigurationError, UsageError


def write_config(tmp_path, name="run.yaml", **updates):
    cfg = {
        "dataset": {"kind": "donut", "n_train": 200, "n_validation": 60,
                    "n_test": 80, "seed": 1},
        "encoder": {"embedding": "standard", "layers": 1, "composition": "Y",
                    "reuploading": True},
        "trash_qubits": 1,
        "training": {"epochs": 3, "batch_size": 50, "seed": 0, "patience": 5},
        "output_dir": str(tmp_path / "run"),
    }
    for key, value in updates.items():
        if isinstance(value, dict) and key in cfg:
            cfg[key].update(value)
        else:
            cfg[key] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------

def test_load_run_config_applies_overrides(tmp_path):
    path = write_config(tmp_path)
    config = load_run_config(path, {"encoder.layers": 6, "training.seed": 9})
    assert config.encoder.layers == 6
    assert config.training.seed == 9


def test_load_run_config_rejects_schema_violations(tmp_path):
    path = write_config(tmp_path, encoder={"layers": -2})
    with pytest.raises(ConfigurationError, match="schema"):
        load_run_config(path)
    path = write_config(tmp_path, name="bad2.yaml", typo_section={"a": 1})
    with pytest.raises(ConfigurationError):
        load_run_config(path)


def test_load_run_config_rejects_oversized_trash_count(tmp_path):
    path = write_config(tmp_path, trash_qubits=2)
    with pytest.raises(ConfigurationError, match="trash"):
        load_run_config(path)


def test_preset_configs_all_validate():
    from importlib import resources
    root = resources.files("qae_anomaly").joinpath("configs")
    found = 0
    for sub in ("2d", "creditcard"):
        for entry in (root / sub).iterdir():
            paths = [entry] if entry.name.endswith(".yaml") else list(entry.iterdir())
            for preset in paths:
                config = load_run_config(str(preset))
                assert config.encoder.parameter_count > 0
                found += 1
    assert found == 66


# ---------------------------------------------------------------------------
# artifact round trip
# ---------------------------------------------------------------------------

def test_artifact_round_trip_bytes_and_scores(tmp_path, rng):
    cfg = EncoderConfig(n_features=2, layers=2, reuploading=True)
    artifact = ModelArtifact(
        encoder=cfg,
        trash_qubits=(1,),
        parameters=rng.uniform(-np.pi, np.pi, cfg.parameter_shape),
        scaler=ScalerParams((-1.0, -2.0), (1.0, 2.0)),
        training_seed=3,
        train_report_digest="d" * 64,
    )
    p1 = str(tmp_path / "model.json")
    p2 = str(tmp_path / "model2.json")
    save_artifact(artifact, p1)
    loaded = load_artifact(p1)
    save_artifact(loaded, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()
    np.testing.assert_array_equal(loaded.parameters, artifact.parameters)

    from qae_anomaly import qae
    probe = rng.uniform(-np.pi, np.pi, (16, 2))
    s1 = qae.anomaly_scores(artifact.model(), probe)
    s2 = qae.anomaly_scores(loaded.model(), probe)
    np.testing.assert_array_equal(s1, s2)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def test_prepare_train_eval_grid_pipeline(tmp_path):
    config = load_run_config(write_config(tmp_path))
    out = config.output_dir

    counts = cmd_prepare(config, out)
    assert counts == {"train": 200, "validation": 60, "test": 80}

    artifact = cmd_train(config, out, out)
    assert (tmp_path / "run" / "model.json").exists()
    assert (tmp_path / "run" / "train_report.csv").exists()
    report_lines = (tmp_path / "run" / "train_report.csv").read_text().splitlines()
    assert report_lines[0] == "epoch,train_cost,val_cost,lr"

    summary = cmd_eval(str(tmp_path / "run" / "model.json"), out, out)
    assert set(summary) == {"auc", "acc@60", "acc@80", "n_test"}
    assert summary["n_test"] == 80
    assert (tmp_path / "run" / "scores.csv").exists()
    assert (tmp_path / "run" / "roc.csv").exists()
    saved = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert saved == summary

    grid_path = str(tmp_path / "run" / "grid.csv")
    grid = cmd_grid(str(tmp_path / "run" / "model.json"), grid_path,
                    bounds=None, resolution=(10, 10))
    lines = open(grid_path).read().splitlines()
    data_rows = [ln for ln in lines if not ln.startswith("#")][1:]
    assert len(data_rows) == 100
    assert grid.chi2.min() == 0.0
    meta = [ln for ln in lines if ln.startswith("# contour_levels,")][0]
    assert len(meta.split(",")) == 5


def test_prepare_deterministic_bytes(tmp_path):
    config = load_run_config(write_config(tmp_path))
    out1 = str(tmp_path / "a")
    out2 = str(tmp_path / "b")
    cmd_prepare(config, out1)
    cmd_prepare(config, out2)
    d1 = open(f"{out1}/dataset.csv", "rb").read()
    d2 = open(f"{out2}/dataset.csv", "rb").read()
    assert d1 == d2


def test_train_deterministic_artifacts(tmp_path):
    config = load_run_config(write_config(tmp_path))
    cmd_prepare(config, config.output_dir)
    out1 = str(tmp_path / "t1")
    out2 = str(tmp_path / "t2")
    cmd_train(config, config.output_dir, out1)
    cmd_train(config, config.output_dir, out2)
    assert open(f"{out1}/model.json", "rb").read() == \
        open(f"{out2}/model.json", "rb").read()
    assert open(f"{out1}/train_report.csv", "rb").read() == \
        open(f"{out2}/train_report.csv", "rb").read()


def test_zero_layer_config_trains_trivially(tmp_path):
    path = write_config(tmp_path, encoder={"layers": 0, "reuploading": True})
    config = load_run_config(path)
    cmd_prepare(config, config.output_dir)
    cmd_train(config, config.output_dir, config.output_dir)
    lines = (tmp_path / "run" / "train_report.csv").read_text().splitlines()[1:]
    assert all(float(ln.split(",")[1]) == 0.0 for ln in lines)


def test_eval_rejects_feature_mismatch(tmp_path, rng):
    config = load_run_config(write_config(tmp_path))
    cmd_prepare(config, config.output_dir)
    cfg5 = EncoderConfig(n_features=5, layers=1)
    artifact = ModelArtifact(cfg5, (4,), np.zeros(cfg5.parameter_shape),
                             ScalerParams((0.0,) * 5, (1.0,) * 5), 0, "x" * 64)
    model_path = str(tmp_path / "wrong.json")
    save_artifact(artifact, model_path)
    with pytest.raises(UsageError, match="features"):
        cmd_eval(model_path, config.output_dir, str(tmp_path / "evalout"))


def test_grid_rejects_non_2d_model(tmp_path):
    cfg5 = EncoderConfig(n_features=5, layers=1)
    artifact = ModelArtifact(cfg5, (4,), np.zeros(cfg5.parameter_shape),
                             ScalerParams((0.0,) * 5, (1.0,) * 5), 0, "x" * 64)
    model_path = str(tmp_path / "wrong.json")
    save_artifact(artifact, model_path)
    with pytest.raises(UsageError, match="2-feature"):
        cmd_grid(model_path, str(tmp_path / "g.csv"), None, (5, 5))


# ---------------------------------------------------------------------------
# process-level exit codes
# ---------------------------------------------------------------------------

def run_cli(*argv):
    return subprocess.run([sys.executable, "-m", "qae_anomaly.cli", *argv],
                          capture_output=True, text=True)


def test_cli_exit_codes(tmp_path):
    missing = run_cli("prepare", "--config", str(tmp_path / "nope.yaml"))
    assert missing.returncode == 1

    bad_args = run_cli("prepare")
    assert bad_args.returncode == 1

    cc_cfg = {
        "dataset": {"kind": "creditcard", "path": str(tmp_path / "absent.csv")},
        "encoder": {"layers": 1},
        "training": {"epochs": 1},
        "output_dir": str(tmp_path / "cc"),
    }
    cc_path = tmp_path / "cc.yaml"
    cc_path.write_text(yaml.safe_dump(cc_cfg))
    data_error = run_cli("prepare", "--config", str(cc_path))
    assert data_error.returncode == 2


def test_cli_m1_and_m9_style_configs_accepted(tmp_path):
    """Benchmark-shaped configs parse and run end to end at tiny scale."""
    m1 = write_config(tmp_path, name="m1.yaml",
                      encoder={"embedding": "standard", "layers": 4,
                               "composition": "Y", "reuploading": False},
                      output_dir=str(tmp_path / "m1"))
    m9 = write_config(tmp_path, name="m9.yaml",
                      encoder={"embedding": "alternate", "layers": 8,
                               "composition": "YXY", "reuploading": True},
                      training={"epochs": 1, "batch_size": 100, "seed": 0},
                      output_dir=str(tmp_path / "m9"))
    for path in (m1, m9):
        config = load_run_config(path)
        cmd_prepare(config, config.output_dir)
        cmd_train(config, config.output_dir, config.output_dir)
    m9_cfg = load_run_config(m9)
    assert m9_cfg.encoder.n_qubits == 4
    assert m9_cfg.encoder.parameter_count == 8 * 4 * 3
