"""Command-line surface: prepare, train, eval, grid.

Run configs are YAML documents validated against the packaged JSON schema
(``configs/schema.json``); benchmark presets ship under ``configs/``.
Every command is deterministic under a fixed seed and config, writes its
outputs atomically, and exits 0 on success, 1 on usage or configuration
errors, 2 on data errors, and 3 on numeric failures.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import datasets, metrics, qae, training
from .circuits import Embedding, EncoderConfig, parse_composition
from .datasets import (LabeledDataset, ScalerParams, apply_scaler, atomic_write_text,
                       build_2d_dataset, fit_scaler, load_creditcard, load_dataset,
                       save_dataset)
from .errors import (ConfigurationError, DataError, NumericError, QaeError,
                     UsageError)
from .qae import QaeModel
from .training import TrainConfig, TrainReport

ARTIFACT_VERSION = 1

DATASET_FILE = "dataset.csv"
SCALER_FILE = "scaler.json"
MODEL_FILE = "model.json"
REPORT_FILE = "train_report.csv"

TPR_TARGETS = (0.60, 0.80)


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass
class DatasetSpec:
    kind: str
    n_train: int = 1000
    n_validation: int = 250
    n_test: int = 500
    noise: float | None = None
    seed: int = 0
    path: str | None = None

    @property
    def n_features(self) -> int:
        return 5 if self.kind == "creditcard" else 2


@dataclass
class RunConfig:
    dataset: DatasetSpec
    encoder: EncoderConfig
    trash_count: int
    training: TrainConfig
    grid_resolution: tuple[int, int]
    output_dir: str


def _schema() -> dict:
    text = resources.files("qae_anomaly").joinpath("configs/schema.json").read_text()
    return json.loads(text)


def build_encoder_config(section: dict, n_features: int) -> EncoderConfig:
    name = section.get("embedding", "standard")
    if name == "standard":
        emb = Embedding.standard()
    elif name == "parallel":
        emb = Embedding.parallel()
    elif name == "alternate":
        emb = Embedding.alternate()
    else:
        if "d" not in section or "pauli_cycle" not in section:
            raise ConfigurationError(
                "generalized embedding requires 'd' and 'pauli_cycle'")
        emb = Embedding.generalized(section["d"], tuple(section["pauli_cycle"]))
    return EncoderConfig(
        n_features=n_features,
        embedding=emb,
        layers=section.get("layers", 4),
        composition=parse_composition(section.get("composition", "Y")),
        reuploading=section.get("reuploading", False),
        entangler_range_policy=section.get("entangler_range_policy", "cycle"),
        embedding_angle_factor=section.get("embedding_angle_factor", 1.0),
        reupload_leading_embed=section.get("reupload_leading_embed", True),
    )


def load_run_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Load, validate, and assemble a run config, applying CLI overrides."""
    try:
        with open(path) as fh:
            document = yaml.safe_load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}")
    if not isinstance(document, dict):
        raise ConfigurationError("config must be a mapping")
    for key, value in (overrides or {}).items():
        section, _, leaf = key.partition(".")
        if leaf:
            document.setdefault(section, {})[leaf] = value
        else:
            document[section] = value
    try:
        jsonschema.validate(document, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigurationError(f"config rejected by schema: {exc.message}")

    ds = DatasetSpec(**document["dataset"])
    if ds.kind == "creditcard" and not ds.path:
        raise ConfigurationError("creditcard dataset requires 'path'")
    encoder = build_encoder_config(document.get("encoder", {}), ds.n_features)
    trash_count = document.get("trash_qubits", 1)
    if not 1 <= trash_count < encoder.n_qubits:
        raise ConfigurationError(
            f"trash_qubits={trash_count} must be in [1, {encoder.n_qubits})")
    tcfg = TrainConfig(**document.get("training", {}))
    resolution = tuple(document.get("metrics", {}).get("grid_resolution", (200, 200)))
    return RunConfig(ds, encoder, trash_count, tcfg, resolution,
                     document["output_dir"])


# ---------------------------------------------------------------------------
# model artifact
# ---------------------------------------------------------------------------

def _encoder_to_dict(cfg: EncoderConfig) -> dict:
    return {
        "n_features": cfg.n_features,
        "embedding": {"name": cfg.embedding.name, "d": cfg.embedding.d,
                      "pauli_cycle": list(cfg.embedding.pauli_cycle)},
        "layers": cfg.layers,
        "composition": "".join(cfg.composition),
        "reuploading": cfg.reuploading,
        "entangler_range_policy": cfg.entangler_range_policy,
        "embedding_angle_factor": cfg.embedding_angle_factor,
        "reupload_leading_embed": cfg.reupload_leading_embed,
    }


def _encoder_from_dict(d: dict) -> EncoderConfig:
    emb = d["embedding"]
    return EncoderConfig(
        n_features=d["n_features"],
        embedding=Embedding(emb["d"], tuple(emb["pauli_cycle"]), emb["name"]),
        layers=d["layers"],
        composition=parse_composition(d["composition"]),
        reuploading=d["reuploading"],
        entangler_range_policy=d["entangler_range_policy"],
        embedding_angle_factor=d["embedding_angle_factor"],
        reupload_leading_embed=d["reupload_leading_embed"],
    )


@dataclass
class ModelArtifact:
    encoder: EncoderConfig
    trash_qubits: tuple[int, ...]
    parameters: np.ndarray
    scaler: ScalerParams
    training_seed: int
    train_report_digest: str

    def model(self) -> QaeModel:
        return QaeModel(self.encoder, self.parameters, self.trash_qubits)


def save_artifact(artifact: ModelArtifact, path: str) -> None:
    payload = {
        "format_version": ARTIFACT_VERSION,
        "encoder": _encoder_to_dict(artifact.encoder),
        "trash_qubits": list(artifact.trash_qubits),
        "parameters": artifact.parameters.tolist(),
        "scaler": artifact.scaler.to_dict(),
        "training_seed": artifact.training_seed,
        "train_report_digest": artifact.train_report_digest,
    }
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=1) + "\n")


def load_artifact(path: str) -> ModelArtifact:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"model artifact not found: {path}")
    except json.JSONDecodeError as exc:
        raise DataError(f"model artifact is not valid JSON: {exc}")
    if payload.get("format_version") != ARTIFACT_VERSION:
        raise DataError(
            f"unsupported artifact version {payload.get('format_version')}")
    encoder = _encoder_from_dict(payload["encoder"])
    params = np.asarray(payload["parameters"], dtype=float)
    if params.size == 0:
        params = params.reshape(encoder.parameter_shape)
    return ModelArtifact(
        encoder=encoder,
        trash_qubits=tuple(payload["trash_qubits"]),
        parameters=params,
        scaler=ScalerParams.from_dict(payload["scaler"]),
        training_seed=payload["training_seed"],
        train_report_digest=payload["train_report_digest"],
    )


def report_to_csv(report: TrainReport) -> str:
    lines = ["epoch,train_cost,val_cost,lr"]
    for epoch, tc, vc, lr in report.rows():
        lines.append(f"{epoch},{tc:.17g},{vc:.17g},{lr:.17g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_prepare(config: RunConfig, out_dir: str) -> dict[str, int]:
    """Materialize the scaled dataset CSV and scaler parameters."""
    ds = config.dataset
    if ds.kind == "creditcard":
        raw = load_creditcard(ds.path, seed=ds.seed)
    else:
        raw = build_2d_dataset(ds.kind, ds.n_train, ds.n_validation, ds.n_test,
                               noise=ds.noise, seed=ds.seed)
    scaler = fit_scaler(raw)
    scaled = apply_scaler(raw, scaler)
    out = Path(out_dir)
    save_dataset(scaled, str(out / DATASET_FILE))
    atomic_write_text(str(out / SCALER_FILE),
                      json.dumps(scaler.to_dict(), sort_keys=True) + "\n")
    counts = scaled.split_counts()
    print(" ".join(f"{split}={counts[split]}" for split in datasets.SPLITS))
    return counts


def _load_prepared(data_dir: str) -> tuple[LabeledDataset, ScalerParams]:
    root = Path(data_dir)
    csv = root / DATASET_FILE if root.is_dir() else root
    if not csv.exists():
        raise UsageError(f"prepared dataset not found at {csv}; run prepare first")
    data = load_dataset(str(csv))
    scaler_path = csv.parent / SCALER_FILE
    if not scaler_path.exists():
        raise UsageError(f"scaler parameters not found at {scaler_path}")
    scaler = ScalerParams.from_dict(json.loads(scaler_path.read_text()))
    return data, scaler


def cmd_train(config: RunConfig, data_dir: str, out_dir: str) -> ModelArtifact:
    """Train per the run config and write the artifact plus per-epoch CSV."""
    data, scaler = _load_prepared(data_dir)
    if data.n_features != config.encoder.n_features:
        raise UsageError(
            f"dataset has {data.n_features} features, encoder expects "
            f"{config.encoder.n_features}")
    model = QaeModel.with_trash_count(
        config.encoder, np.zeros(config.encoder.parameter_shape),
        config.trash_count)
    report = training.train(model, data, config.training)
    report_csv = report_to_csv(report)
    digest = hashlib.sha256(report_csv.encode()).hexdigest()
    out = Path(out_dir)
    atomic_write_text(str(out / REPORT_FILE), report_csv)
    artifact = ModelArtifact(
        encoder=config.encoder,
        trash_qubits=qae.default_trash_qubits(config.encoder, config.trash_count),
        parameters=report.parameters,
        scaler=scaler,
        training_seed=config.training.seed,
        train_report_digest=digest,
    )
    save_artifact(artifact, str(out / MODEL_FILE))
    print(f"trained {report.epochs_run} epochs, best epoch {report.best_epoch}, "
          f"best validation cost {min(report.val_costs):.6g}")
    return artifact


def cmd_eval(model_path: str, data_dir: str, out_dir: str) -> dict:
    """Score the test split and write scores, ROC, and the metric summary."""
    artifact = load_artifact(model_path)
    data, _ = _load_prepared(data_dir)
    if data.n_features != artifact.encoder.n_features:
        raise UsageError(
            f"dataset has {data.n_features} features, model expects "
            f"{artifact.encoder.n_features}")
    model = artifact.model()
    X = data.features_of("test")
    labels = data.labels_of("test")
    scores = qae.anomaly_scores(model, X)
    roc = metrics.roc_auc(scores, labels)
    out = Path(out_dir)
    metrics.write_scores_csv(str(out / "scores.csv"), scores, labels)
    metrics.write_roc_csv(str(out / "roc.csv"), roc)
    summary = {
        "auc": roc.auc,
        "acc@60": metrics.accuracy_at_tpr(scores, labels, TPR_TARGETS[0]),
        "acc@80": metrics.accuracy_at_tpr(scores, labels, TPR_TARGETS[1]),
        "n_test": int(labels.size),
    }
    atomic_write_text(str(out / "summary.json"),
                      json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(f"auc={summary['auc']:.4f} acc@60={summary['acc@60']:.4f} "
          f"acc@80={summary['acc@80']:.4f} n_test={summary['n_test']}")
    return summary


def cmd_grid(model_path: str, out_path: str,
             bounds: tuple[tuple[float, float], tuple[float, float]] | None,
             resolution: tuple[int, int]) -> metrics.Chi2Grid:
    """Export the chi-square decision grid for the plotting component."""
    artifact = load_artifact(model_path)
    if artifact.encoder.n_features != 2:
        raise UsageError("grid export needs a 2-feature model")
    if bounds is None:
        bounds = ((artifact.scaler.minimum[0], artifact.scaler.maximum[0]),
                  (artifact.scaler.minimum[1], artifact.scaler.maximum[1]))
    grid = metrics.chi2_grid(artifact.model(), bounds, resolution,
                             scaler=artifact.scaler)
    metrics.write_grid_csv(out_path, grid)
    print(f"grid {resolution[0]}x{resolution[1]} written to {out_path}")
    return grid


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_encoder_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--layers", type=int)
    parser.add_argument("--embedding",
                        choices=["standard", "parallel", "alternate"])
    parser.add_argument("--reupload", action="store_true", default=None)
    parser.add_argument("--composition")
    parser.add_argument("--trash-qubits", type=int, dest="trash_qubits")
    parser.add_argument("--seed", type=int)


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if getattr(args, "layers", None) is not None:
        overrides["encoder.layers"] = args.layers
    if getattr(args, "embedding", None) is not None:
        overrides["encoder.embedding"] = args.embedding
    if getattr(args, "reupload", None) is not None:
        overrides["encoder.reuploading"] = True
    if getattr(args, "composition", None) is not None:
        overrides["encoder.composition"] = args.composition
    if getattr(args, "trash_qubits", None) is not None:
        overrides["trash_qubits"] = args.trash_qubits
    if getattr(args, "seed", None) is not None:
        overrides["training.seed"] = args.seed
    return overrides


def build_parser() -> _Parser:
    parser = _Parser(prog="qae-anomaly",
                     description="Quantum-autoencoder anomaly detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prep = sub.add_parser("prepare", help="generate or ingest a dataset")
    p_prep.add_argument("--config", required=True)
    p_prep.add_argument("--out")

    p_train = sub.add_parser("train", help="train a model on a prepared dataset")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--data")
    p_train.add_argument("--out")
    _add_encoder_overrides(p_train)

    p_eval = sub.add_parser("eval", help="score the test split of a dataset")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--out", required=True)

    p_grid = sub.add_parser("grid", help="export a chi-square decision grid")
    p_grid.add_argument("--model", required=True)
    p_grid.add_argument("--out", required=True)
    p_grid.add_argument("--bounds", type=float, nargs=4,
                        metavar=("X0MIN", "X0MAX", "X1MIN", "X1MAX"))
    p_grid.add_argument("--resolution", type=int, nargs=2, default=(200, 200))

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "prepare":
        config = load_run_config(args.config)
        cmd_prepare(config, args.out or config.output_dir)
    elif args.command == "train":
        config = load_run_config(args.config, _collect_overrides(args))
        out = args.out or config.output_dir
        cmd_train(config, args.data or config.output_dir, out)
    elif args.command == "eval":
        cmd_eval(args.model, args.data, args.out)
    elif args.command == "grid":
        bounds = None
        if args.bounds is not None:
            bounds = ((args.bounds[0], args.bounds[1]),
                      (args.bounds[2], args.bounds[3]))
        cmd_grid(args.model, args.out, bounds, tuple(args.resolution))
    return 0


def main() -> None:
    try:
        sys.exit(run(sys.argv[1:]))
    except QaeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, DataError):
            sys.exit(2)
        if isinstance(exc, NumericError):
            sys.exit(3)
        sys.exit(1)


if __name__ == "__main__":
    main()
