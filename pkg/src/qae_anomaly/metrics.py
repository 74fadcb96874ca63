"""ROC/AUC, accuracy at fixed TPR, and chi-square decision-boundary grids.

The anomaly class is the positive class throughout and higher scores mean
more anomalous.  AUC is reported exactly as computed; values below 0.5
indicate inverted scoring and are meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import qae
from .datasets import ScalerParams, atomic_write_text, scale_point
from .errors import UsageError
from .qae import QaeModel

DEFAULT_CONFIDENCES = (0.80, 0.90, 0.95, 0.98)


@dataclass
class RocCurve:
    """Threshold sweep with tied scores grouped at one threshold.

    thresholds[0] is +inf so the curve starts at (0, 0); it ends at (1, 1).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def _check_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels, dtype=int).ravel()
    if scores.shape != labels.shape:
        raise UsageError("scores and labels lengths disagree")
    return scores, labels


def roc_auc(scores, labels) -> RocCurve:
    """ROC curve and trapezoidal AUC; anomalies (label 1) are positives."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise UsageError("roc_auc needs both classes present")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels == 0)
    # keep one point per distinct score (the last index of each tie group)
    last_of_group = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    idx = np.flatnonzero(last_of_group)
    tpr = np.r_[0.0, tp[idx] / n_pos]
    fpr = np.r_[0.0, fp[idx] / n_neg]
    thresholds = np.r_[np.inf, sorted_scores[idx]]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds, fpr, tpr, auc)


def tpr_threshold(scores, labels, tpr_target: float) -> float:
    """Largest score threshold reaching TPR >= target over the anomalies."""
    scores, labels = _check_scores_labels(scores, labels)
    anomaly_scores = scores[labels == 1]
    if anomaly_scores.size == 0:
        raise UsageError("no anomaly samples to set a TPR threshold")
    if not 0.0 < tpr_target <= 1.0:
        raise UsageError(f"tpr_target must be in (0, 1], got {tpr_target}")
    k = math.ceil(tpr_target * anomaly_scores.size)
    return float(np.sort(anomaly_scores)[::-1][k - 1])


def accuracy_at_tpr(scores, labels, tpr_target: float) -> float:
    """Accuracy at the threshold where anomaly detection first hits the target.

    A sample is flagged anomalous when its score is >= the threshold; the
    accuracy uses the raw class mix of the given labels.
    """
    scores, labels = _check_scores_labels(scores, labels)
    threshold = tpr_threshold(scores, labels, tpr_target)
    predicted = (scores >= threshold).astype(int)
    return float(np.mean(predicted == labels))


# ---------------------------------------------------------------------------
# chi-square decision boundaries
# ---------------------------------------------------------------------------

def chi2_contour_levels(confidences=DEFAULT_CONFIDENCES) -> np.ndarray:
    """Chi-square quantiles at 2 degrees of freedom for the contour set."""
    return stats.chi2.ppf(np.asarray(confidences, dtype=float), df=2)


@dataclass
class Chi2Grid:
    """Reconstruction-probability grid and its chi-square transform."""

    x0: np.ndarray            # (res0,) grid coordinates, axis 0
    x1: np.ndarray            # (res1,)
    prob: np.ndarray          # (res0, res1)
    chi2: np.ndarray          # (res0, res1)
    x_hat: tuple[float, float]
    bounds: tuple[tuple[float, float], tuple[float, float]]
    confidences: tuple[float, ...]
    contour_levels: np.ndarray


def chi2_grid(model: QaeModel, bounds, resolution=(200, 200),
              scaler: ScalerParams | None = None,
              confidences=DEFAULT_CONFIDENCES) -> Chi2Grid:
    """Evaluate -2 log(p(x) / p(x_hat)) over a 2D grid.

    ``bounds`` is ((x0_min, x0_max), (x1_min, x1_max)) in data coordinates;
    when a scaler is given the grid is mapped through it before evaluation,
    so bounds may be stated in raw (pre-scaling) units.
    """
    if model.encoder.n_features != 2:
        raise UsageError("chi2_grid needs a 2-feature model")
    (r0, r1) = resolution
    if r0 < 2 or r1 < 2:
        raise UsageError("grid resolution must be at least 2 per axis")
    (lo0, hi0), (lo1, hi1) = bounds
    x0 = np.linspace(lo0, hi0, r0)
    x1 = np.linspace(lo1, hi1, r1)
    g0, g1 = np.meshgrid(x0, x1, indexing="ij")
    points = np.column_stack([g0.ravel(), g1.ravel()])
    eval_points = scale_point(points, scaler) if scaler is not None else points
    p = qae.reconstruction_probabilities(model, eval_points).reshape(r0, r1)
    flat_best = int(np.argmax(p))
    i_hat, j_hat = np.unravel_index(flat_best, p.shape)
    p_hat = qae.clamp_probability(p[i_hat, j_hat])
    chi2 = -2.0 * np.log(qae.clamp_probability(p) / p_hat)
    chi2 = np.maximum(chi2, 0.0)
    return Chi2Grid(x0, x1, p, chi2, (float(x0[i_hat]), float(x1[j_hat])),
                    ((float(lo0), float(hi0)), (float(lo1), float(hi1))),
                    tuple(confidences), chi2_contour_levels(confidences))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_roc_csv(path: str, roc: RocCurve) -> None:
    """ROC CSV: a `# auc` summary line, then threshold,fpr,tpr rows."""
    lines = [f"# auc,{roc.auc:.17g}", "threshold,fpr,tpr"]
    for t, f, s in zip(roc.thresholds, roc.fpr, roc.tpr):
        lines.append(f"{t:.17g},{f:.17g},{s:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_scores_csv(path: str, scores, labels) -> None:
    scores, labels = _check_scores_labels(scores, labels)
    lines = ["id,score,label"]
    for i, (s, lab) in enumerate(zip(scores, labels)):
        lines.append(f"{i},{s:.17g},{int(lab)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_grid_csv(path: str, grid: Chi2Grid) -> None:
    """Grid CSV: metadata comment lines, then x0,x1,p,chi2 rows."""
    (b0, b1) = grid.bounds
    lines = [
        f"# bounds_x0,{b0[0]:.17g},{b0[1]:.17g}",
        f"# bounds_x1,{b1[0]:.17g},{b1[1]:.17g}",
        f"# resolution,{grid.x0.size},{grid.x1.size}",
        f"# x_hat,{grid.x_hat[0]:.17g},{grid.x_hat[1]:.17g}",
        "# confidences," + ",".join(f"{c:g}" for c in grid.confidences),
        "# contour_levels," + ",".join(f"{v:.17g}" for v in grid.contour_levels),
        "x0,x1,p,chi2",
    ]
    for i in range(grid.x0.size):
        for j in range(grid.x1.size):
            lines.append(f"{grid.x0[i]:.17g},{grid.x1[j]:.17g},"
                         f"{grid.prob[i, j]:.17g},{grid.chi2[i, j]:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")
