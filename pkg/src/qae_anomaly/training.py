"""Adam training loop with staircase LR decay and validation early stopping.

Defaults follow the benchmark protocol: 500 epochs, batch size 100,
initial rate 0.1 halved every 100 epochs, parameters drawn uniformly from
[-pi, pi].  Overtraining is handled as patience-based early stopping on
the validation cost, restoring the best-epoch parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import EncoderConfig
from .errors import ConfigurationError, NumericError, UsageError
from .gradients import cost_and_parameter_shift_gradient
from .qae import QaeModel, batch_cost

# independent deterministic RNG streams derived from the run seed
_STREAM_INIT = 0
_STREAM_SHUFFLE = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    batch_size: int = 100
    lr0: float = 0.1
    decay_rate: float = 0.5
    decay_every: int = 100
    init_low: float = -math.pi
    init_high: float = math.pi
    seed: int = 0
    patience: int = 20

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if not 0.0 < self.decay_rate <= 1.0:
            raise ConfigurationError("decay_rate must be in (0, 1]")
        if self.decay_every < 1:
            raise ConfigurationError("decay_every must be >= 1")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def zeros_like(theta: np.ndarray) -> "AdamState":
        return AdamState(np.zeros_like(theta), np.zeros_like(theta))


@dataclass
class TrainReport:
    """Per-epoch traces and the restored best parameters."""

    train_costs: list[float]
    val_costs: list[float]
    lr_trace: list[float]
    best_epoch: int
    parameters: np.ndarray = field(repr=False)

    @property
    def epochs_run(self) -> int:
        return len(self.val_costs)

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(epoch, tc, vc, lr) for epoch, (tc, vc, lr) in
                enumerate(zip(self.train_costs, self.val_costs, self.lr_trace))]


def init_parameters(cfg: EncoderConfig, tcfg: TrainConfig) -> np.ndarray:
    """I.i.d. uniform draw on [init_low, init_high], deterministic per seed."""
    rng = np.random.default_rng([tcfg.seed, _STREAM_INIT])
    return rng.uniform(tcfg.init_low, tcfg.init_high, size=cfg.parameter_shape)


def lr_at_epoch(tcfg: TrainConfig, epoch: int) -> float:
    """Staircase decay: lr0 * decay_rate ** floor(epoch / decay_every)."""
    return tcfg.lr0 * tcfg.decay_rate ** (epoch // tcfg.decay_every)


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray,
              lr: float) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns fresh state and parameters."""
    if grad.size and not np.all(np.isfinite(grad)):
        raise NumericError("training aborted: non-finite gradient")
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad ** 2
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    new_theta = theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return AdamState(m, v, step, state.beta1, state.beta2, state.eps), new_theta


def train(model: QaeModel, data, tcfg: TrainConfig) -> TrainReport:
    """Fit the encoder on the dataset's normal-only train/validation splits.

    Parameters are initialized from the run seed (any angles already on the
    model are ignored), mini-batches are reshuffled each epoch, the last
    partial batch is kept, and validation is a full-split evaluation.
    Stops early once the validation cost has not improved for
    ``tcfg.patience`` epochs and restores the best-epoch parameters.
    """
    X_train = data.features_of("train")
    X_val = data.features_of("validation")
    if X_train.shape[0] == 0 or X_val.shape[0] == 0:
        raise UsageError("training requires nonempty train and validation splits")
    for split in ("train", "validation"):
        if np.any(data.labels[data.split == split] != 0):
            raise UsageError(f"{split} split must contain only normal samples")

    theta = init_parameters(model.encoder, tcfg)
    state = AdamState.zeros_like(theta)
    shuffle_rng = np.random.default_rng([tcfg.seed, _STREAM_SHUFFLE])

    best_val = math.inf
    best_theta = theta.copy()
    best_epoch = 0
    stale = 0
    train_costs: list[float] = []
    val_costs: list[float] = []
    lr_trace: list[float] = []

    n_train = X_train.shape[0]
    for epoch in range(tcfg.epochs):
        lr = lr_at_epoch(tcfg, epoch)
        order = shuffle_rng.permutation(n_train)
        epoch_costs = []
        for start in range(0, n_train, tcfg.batch_size):
            batch = X_train[order[start:start + tcfg.batch_size]]
            current = QaeModel(model.encoder, theta, model.trash_qubits)
            cost, grad = cost_and_parameter_shift_gradient(current, batch)
            epoch_costs.append(cost)
            state, theta = adam_step(state, theta, grad, lr)
        train_costs.append(float(np.mean(epoch_costs)))
        lr_trace.append(lr)

        val_cost = batch_cost(QaeModel(model.encoder, theta, model.trash_qubits), X_val)
        val_costs.append(val_cost)
        if val_cost < best_val:
            best_val = val_cost
            best_theta = theta.copy()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= tcfg.patience:
                break

    return TrainReport(train_costs, val_costs, lr_trace, best_epoch, best_theta)


def trained_model(model: QaeModel, report: TrainReport) -> QaeModel:
    """The input model with the report's best parameters attached."""
    return QaeModel(model.encoder, report.parameters, model.trash_qubits)
