"""The autoencoder observable: reconstruction probability, cost, anomaly score.

A trained encoder reconstructs a normal sample when its trash qubits
return to |0...0>; the probability of that event is the per-sample
training signal, and its negative log is both the cost contribution and
the anomaly score.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import circuits, simulator as sim
from .circuits import EncoderConfig
from .errors import ConfigurationError, DataError, UsageError

PROB_FLOOR = 1e-12
FEATURE_RANGE_TOL = 1e-6

# samples per simulation chunk, scaled down as the register grows
_CHUNK_AMPLITUDES = 1 << 22


def default_trash_qubits(cfg: EncoderConfig, count: int) -> tuple[int, ...]:
    """The last ``count`` qubit indices of the register."""
    if not 1 <= count <= cfg.n_qubits:
        raise ConfigurationError(
            f"trash count {count} invalid for {cfg.n_qubits} qubits")
    return tuple(range(cfg.n_qubits - count, cfg.n_qubits))


@dataclass
class QaeModel:
    """Encoder config, trained angles, and the trash-qubit choice."""

    encoder: EncoderConfig
    theta: np.ndarray
    trash_qubits: tuple[int, ...]

    def __post_init__(self):
        self.theta = circuits.validate_parameters(self.encoder, self.theta)
        trash = tuple(sorted(set(self.trash_qubits)))
        if not trash:
            raise ConfigurationError("trash qubit set must be nonempty")
        if trash[0] < 0 or trash[-1] >= self.encoder.n_qubits:
            raise ConfigurationError(
                f"trash qubits {trash} out of range for "
                f"{self.encoder.n_qubits}-qubit encoder")
        self.trash_qubits = trash

    @staticmethod
    def with_trash_count(encoder: EncoderConfig, theta: np.ndarray,
                         count: int = 1) -> "QaeModel":
        return QaeModel(encoder, theta, default_trash_qubits(encoder, count))


def _check_scaled(X: np.ndarray) -> None:
    bound = math.pi + FEATURE_RANGE_TOL
    if X.size and (np.min(X) < -bound or np.max(X) > bound):
        raise DataError(
            "features outside [-pi, pi]; scale inputs before scoring "
            f"(saw range [{np.min(X):.4g}, {np.max(X):.4g}])")


def reconstruction_probabilities(model: QaeModel, X: np.ndarray) -> np.ndarray:
    """Trash-zero probability for every row of X, simulated in chunks."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_scaled(X)
    n = model.encoder.n_qubits
    chunk = max(1, _CHUNK_AMPLITUDES >> n)
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        amps = circuits.encode_batch(block, model.theta, model.encoder)
        out[start:start + chunk] = sim.zero_bit_probability(
            amps, n, model.trash_qubits)
    return np.clip(out, 0.0, 1.0)


def reconstruction_probability(model: QaeModel, x: Sequence[float]) -> float:
    """Probability that the encoded sample's trash qubits all read 0."""
    return float(reconstruction_probabilities(model, np.asarray(x, dtype=float)[None, :])[0])


def clamp_probability(p):
    """Clamp to [PROB_FLOOR, 1] so the log and its gradient stay bounded."""
    return np.clip(p, PROB_FLOOR, 1.0)


def anomaly_scores(model: QaeModel, X: np.ndarray) -> np.ndarray:
    return -np.log(clamp_probability(reconstruction_probabilities(model, X)))


def anomaly_score(model: QaeModel, x: Sequence[float]) -> float:
    """Negative log reconstruction probability; higher means more anomalous."""
    return float(-np.log(clamp_probability(reconstruction_probability(model, x))))


def batch_cost(model: QaeModel, X: np.ndarray) -> float:
    """Mean negative log reconstruction probability over the batch."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise UsageError("batch_cost requires a nonempty batch")
    return float(np.mean(anomaly_scores(model, X)))
