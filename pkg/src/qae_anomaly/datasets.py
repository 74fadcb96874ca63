"""Dataset generation, credit-card ingestion, scaling, and split management.

The 2D generators are parametric re-creations of the usual toy shapes
(two moon arcs, concentric circles, an annulus with a central cluster,
and the projected S manifold).  Training is one-class: train and
validation splits hold only normal samples, the test split mixes both
classes.  Features are min-max scaled to [-pi, pi] using statistics from
the training split alone; out-of-range values from other splits clip to
the boundary.
"""
from __future__ import annotations

import hashlib
import math
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from .errors import ConfigurationError, DataError

SPLITS = ("train", "validation", "test")

LABEL_NORMAL = 0
LABEL_ANOMALY = 1

CREDITCARD_COLUMNS = ["Time"] + [f"V{i}" for i in range(1, 29)] + ["Amount", "Class"]
CREDITCARD_FEATURES = ["V1", "V2", "V3", "V4", "V5"]
# normal-row split sizes for the full credit-card file (284315 normals)
CREDITCARD_SPLIT = (225177, 56863, 2275)

GENERATOR_NOISE_DEFAULTS = {"moons": 0.05, "circle": 0.05, "donut": 0.05, "s_curve": 0.0}


@dataclass
class LabeledDataset:
    """Feature matrix with normal/anomaly labels and split tags."""

    features: np.ndarray  # (N, n_features) float
    labels: np.ndarray    # (N,) int, 0 = normal, 1 = anomaly
    split: np.ndarray     # (N,) str, one of SPLITS or "" before assignment
    provenance: str = ""

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int)
        self.split = np.asarray(self.split, dtype="U16")
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.split.shape != (n,):
            raise DataError("features, labels, and split lengths disagree")

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def features_of(self, split: str) -> np.ndarray:
        return self.features[self.split == split]

    def labels_of(self, split: str) -> np.ndarray:
        return self.labels[self.split == split]

    def split_counts(self) -> dict[str, int]:
        return {s: int(np.sum(self.split == s)) for s in SPLITS}

    def validate_one_class_splits(self) -> None:
        for s in ("train", "validation"):
            if np.any(self.labels_of(s) != LABEL_NORMAL):
                raise DataError(f"{s} split contains anomaly-labeled rows")


def _concat(parts: list[LabeledDataset], provenance: str) -> LabeledDataset:
    return LabeledDataset(
        np.concatenate([p.features for p in parts]),
        np.concatenate([p.labels for p in parts]),
        np.concatenate([p.split for p in parts]),
        provenance,
    )


def _with_split(data: LabeledDataset, split: str) -> LabeledDataset:
    return replace(data, split=np.full(data.labels.shape[0], split, dtype="U16"))


# ---------------------------------------------------------------------------
# 2D generators
# ---------------------------------------------------------------------------

def _class_counts(n: int) -> tuple[int, int]:
    return (n + 1) // 2, n // 2


def gen_moons(n: int, noise: float = 0.05, seed: int = 0,
              normal_arc: int = 0) -> LabeledDataset:
    """Two interleaving half-circle arcs; arc 0 is (cos t, sin t), t in [0, pi].

    Arc 0 is labeled normal by default; pass ``normal_arc=1`` to flip.
    """
    if n < 2:
        raise ConfigurationError("need at least 2 samples")
    n0, n1 = _class_counts(n)
    rng = np.random.default_rng(seed)
    t0 = rng.uniform(0.0, math.pi, n0)
    t1 = rng.uniform(0.0, math.pi, n1)
    arc0 = np.column_stack([np.cos(t0), np.sin(t0)])
    arc1 = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    pts = np.concatenate([arc0, arc1]) + noise * rng.standard_normal((n, 2))
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    if normal_arc == 1:
        labels = 1 - labels
    return LabeledDataset(pts, labels, np.full(n, "", dtype="U16"),
                          f"moons(n={n},noise={noise},seed={seed})")


def gen_circle(n: int, noise: float = 0.05, seed: int = 0,
               inner_radius: float = 0.5) -> LabeledDataset:
    """Noisy unit circle (normal) with a concentric inner circle (anomaly)."""
    if n < 2:
        raise ConfigurationError("need at least 2 samples")
    n0, n1 = _class_counts(n)
    rng = np.random.default_rng(seed)
    phi0 = rng.uniform(0.0, 2.0 * math.pi, n0)
    phi1 = rng.uniform(0.0, 2.0 * math.pi, n1)
    outer = np.column_stack([np.cos(phi0), np.sin(phi0)])
    inner = inner_radius * np.column_stack([np.cos(phi1), np.sin(phi1)])
    pts = np.concatenate([outer, inner]) + noise * rng.standard_normal((n, 2))
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return LabeledDataset(pts, labels, np.full(n, "", dtype="U16"),
                          f"circle(n={n},noise={noise},seed={seed})")


def gen_donut(n: int, radii: tuple[float, float] = (0.3, 1.0),
              noise: float = 0.05, seed: int = 0,
              core_sigma: float = 0.05) -> LabeledDataset:
    """Thick annulus (normal) around a central Gaussian cluster (anomaly).

    With ``noise=0`` every normal point has radius inside [radii[0], radii[1]].
    """
    if n < 2:
        raise ConfigurationError("need at least 2 samples")
    r_in, r_out = radii
    if not 0.0 <= r_in < r_out:
        raise ConfigurationError(f"bad annulus radii {radii}")
    n0, n1 = _class_counts(n)
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2.0 * math.pi, n0)
    r = rng.uniform(r_in, r_out, n0)
    ring = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    ring = ring + noise * rng.standard_normal((n0, 2))
    core = core_sigma * rng.standard_normal((n1, 2))
    pts = np.concatenate([ring, core])
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return LabeledDataset(pts, labels, np.full(n, "", dtype="U16"),
                          f"donut(n={n},radii={radii},noise={noise},seed={seed})")


def gen_s_curve(n: int, noise: float = 0.0, seed: int = 0) -> LabeledDataset:
    """The S manifold (sin t, sign(t) * (cos t - 1)), all labeled normal."""
    if n < 2:
        raise ConfigurationError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1.5 * math.pi, 1.5 * math.pi, n)
    pts = np.column_stack([np.sin(t), np.sign(t) * (np.cos(t) - 1.0)])
    pts = pts + noise * rng.standard_normal((n, 2))
    return LabeledDataset(pts, np.zeros(n, dtype=int), np.full(n, "", dtype="U16"),
                          f"s_curve(n={n},noise={noise},seed={seed})")


def gen_scurve_pseudo_anomalies(normal: LabeledDataset, n: int,
                                min_dist: float = 0.07, seed: int = 0,
                                bounds: np.ndarray | None = None,
                                margin: float = 0.1) -> LabeledDataset:
    """Uniform samples over the plot region, kept only when farther than
    ``min_dist`` from every normal point.

    ``bounds`` is a (2, n_features) array of per-feature (low, high); by
    default the normal points' bounding box padded by ``margin`` per side.
    """
    pts = normal.features
    if bounds is None:
        lo = pts.min(axis=0) - margin
        hi = pts.max(axis=0) + margin
    else:
        bounds = np.asarray(bounds, dtype=float)
        lo, hi = bounds[0], bounds[1]
    tree = cKDTree(pts)
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    total_kept = 0
    attempts = 0
    max_attempts = max(200_000, 2000 * n)
    while total_kept < n:
        draw = max(n - total_kept, 1000)
        cand = rng.uniform(lo, hi, size=(draw, pts.shape[1]))
        dist, _ = tree.query(cand, k=1)
        ok = cand[dist > min_dist]
        kept.append(ok)
        total_kept += ok.shape[0]
        attempts += draw
        if attempts >= max_attempts and total_kept < n:
            rate = 1.0 - total_kept / attempts
            raise ConfigurationError(
                f"pseudo-anomaly region too tight: rejection rate {rate:.4f}")
        if attempts >= 10_000 and total_kept < attempts * 0.001:
            raise ConfigurationError(
                "pseudo-anomaly region too tight: rejection rate > 0.999")
    out = np.concatenate(kept)[:n]
    return LabeledDataset(out, np.ones(n, dtype=int), np.full(n, "", dtype="U16"),
                          f"scurve_pseudo(n={n},min_dist={min_dist},seed={seed})")


_GENERATORS: dict[str, Callable[..., LabeledDataset]] = {
    "moons": gen_moons,
    "circle": gen_circle,
    "donut": gen_donut,
    "s_curve": gen_s_curve,
}


def build_2d_dataset(kind: str, n_train: int, n_validation: int, n_test: int,
                     noise: float | None = None, seed: int = 0) -> LabeledDataset:
    """Assemble raw (unscaled) splits for one 2D dataset.

    Train and validation are normal-only and each split uses its own seed.
    The test split is half normal, half anomaly; s-curve anomalies are
    pseudo-samples kept away from the training manifold.
    """
    if kind not in _GENERATORS:
        raise ConfigurationError(f"unknown 2D dataset kind {kind!r}")
    if noise is None:
        noise = GENERATOR_NOISE_DEFAULTS[kind]
    gen = _GENERATORS[kind]

    def normals(count: int, sub_seed: int) -> LabeledDataset:
        if kind == "s_curve":
            return gen_s_curve(count, noise=noise, seed=sub_seed)
        full = gen(2 * count, noise=noise, seed=sub_seed)
        keep = full.labels == LABEL_NORMAL
        return LabeledDataset(full.features[keep], full.labels[keep],
                              full.split[keep], full.provenance)

    train = _with_split(normals(n_train, seed), "train")
    val = _with_split(normals(n_validation, seed + 1), "validation")
    if kind == "s_curve":
        n_norm, n_anom = (n_test + 1) // 2, n_test // 2
        test_norm = gen_s_curve(n_norm, noise=noise, seed=seed + 2)
        test_anom = gen_scurve_pseudo_anomalies(train, n_anom, seed=seed + 3)
        test = _with_split(_concat([test_norm, test_anom], ""), "test")
    else:
        test = _with_split(gen(n_test, noise=noise, seed=seed + 2), "test")
    prov = f"{kind}(train={n_train},val={n_validation},test={n_test}," \
           f"noise={noise},seed={seed})"
    return _concat([train, val, test], prov)


# ---------------------------------------------------------------------------
# credit-card ingestion
# ---------------------------------------------------------------------------

def _file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def load_creditcard(path: str, seed: int = 0) -> LabeledDataset:
    """Ingest the credit-card CSV: V1..V5 features, frauds reserved for test.

    Fraud rows (Class == 1) all land in the test split.  Normal rows are
    shuffled with the given seed and split 225177 / 56863 / 2275 for the
    full file; smaller files split with the same proportions (normal test
    rows are the last block after the shuffle).
    """
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"credit-card file not found: {path}")
    except Exception as exc:  # pragma: no cover - delegated parse failures
        raise DataError(f"cannot parse credit-card file {path}: {exc}")
    missing = [c for c in CREDITCARD_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"credit-card file missing columns: {missing}")
    needed = CREDITCARD_FEATURES + ["Class"]
    values = frame[needed].apply(pd.to_numeric, errors="coerce")
    bad = values.isna().any(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(f"non-numeric cell in credit-card file at row {row}")
    features = values[CREDITCARD_FEATURES].to_numpy(dtype=float)
    labels = values["Class"].to_numpy(dtype=int)
    if not np.isin(labels, (0, 1)).all():
        raise DataError("Class column must be 0 or 1")

    normal_idx = np.flatnonzero(labels == 0)
    fraud_idx = np.flatnonzero(labels == 1)
    rng = np.random.default_rng(seed)
    shuffled = normal_idx[rng.permutation(normal_idx.size)]

    n_normal = shuffled.size
    if n_normal == sum(CREDITCARD_SPLIT):
        n_train, n_val, n_test_norm = CREDITCARD_SPLIT
    else:
        total = sum(CREDITCARD_SPLIT)
        n_train = int(n_normal * CREDITCARD_SPLIT[0] / total)
        n_val = int(n_normal * CREDITCARD_SPLIT[1] / total)
        n_test_norm = n_normal - n_train - n_val
    if min(n_train, n_val, n_test_norm) <= 0:
        raise DataError(f"too few normal rows ({n_normal}) to split")

    split = np.full(labels.shape[0], "", dtype="U16")
    split[shuffled[:n_train]] = "train"
    split[shuffled[n_train:n_train + n_val]] = "validation"
    split[shuffled[n_train + n_val:]] = "test"
    split[fraud_idx] = "test"
    return LabeledDataset(features, labels, split,
                          f"creditcard(sha256={_file_digest(path)},seed={seed})")


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    """Per-feature min/max observed on the fit split."""

    minimum: tuple[float, ...]
    maximum: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"min": list(self.minimum), "max": list(self.maximum)}

    @staticmethod
    def from_dict(d: dict) -> "ScalerParams":
        return ScalerParams(tuple(float(v) for v in d["min"]),
                            tuple(float(v) for v in d["max"]))


def fit_scaler(data: LabeledDataset, split: str = "train") -> ScalerParams:
    """Min/max per feature over one split; constant features are an error."""
    X = data.features_of(split)
    if X.shape[0] == 0:
        raise DataError(f"cannot fit scaler: empty {split!r} split")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    degenerate = np.flatnonzero(hi <= lo)
    if degenerate.size:
        raise DataError(f"degenerate (constant) features at columns {degenerate.tolist()}")
    return ScalerParams(tuple(lo.tolist()), tuple(hi.tolist()))


def apply_scaler(data: LabeledDataset, params: ScalerParams) -> LabeledDataset:
    """Map features to [-pi, pi]; values beyond the fit range are clipped."""
    lo = np.asarray(params.minimum)
    hi = np.asarray(params.maximum)
    if lo.size != data.n_features:
        raise DataError(
            f"scaler fitted on {lo.size} features, data has {data.n_features}")
    scaled = -math.pi + 2.0 * math.pi * (data.features - lo) / (hi - lo)
    scaled = np.clip(scaled, -math.pi, math.pi)
    return replace(data, features=scaled, provenance=data.provenance + "+scaled")


def scale_point(x: np.ndarray, params: ScalerParams) -> np.ndarray:
    """Scaler transform for loose coordinates (grids, probes)."""
    lo = np.asarray(params.minimum)
    hi = np.asarray(params.maximum)
    return np.clip(-math.pi + 2.0 * math.pi * (np.asarray(x, dtype=float) - lo)
                   / (hi - lo), -math.pi, math.pi)


# ---------------------------------------------------------------------------
# canonical CSV
# ---------------------------------------------------------------------------

def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_dataset(data: LabeledDataset, path: str) -> None:
    """Write the canonical dataset CSV: f0..f{n-1},label,split."""
    data.validate_one_class_splits()
    frame = pd.DataFrame(data.features,
                         columns=[f"f{i}" for i in range(data.n_features)])
    frame["label"] = data.labels
    frame["split"] = data.split
    atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g"))


def load_dataset(path: str) -> LabeledDataset:
    frame = pd.read_csv(path, float_precision="round_trip")
    feature_cols = [c for c in frame.columns if c.startswith("f")]
    expected = [f"f{i}" for i in range(len(feature_cols))]
    if feature_cols != expected or "label" not in frame or "split" not in frame:
        raise DataError(f"{path} is not a canonical dataset CSV")
    return LabeledDataset(frame[feature_cols].to_numpy(dtype=float),
                          frame["label"].to_numpy(dtype=int),
                          frame["split"].to_numpy(dtype="U16"),
                          f"file({os.path.basename(path)})")
