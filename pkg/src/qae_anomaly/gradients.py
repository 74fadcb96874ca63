"""Exact gradients of the batch cost with respect to the trainable angles.

Every trainable gate is a Pauli rotation, so the parameter-shift rule
gives the exact derivative of the reconstruction probability:

    dp/dtheta_j = (p(theta_j + pi/2) - p(theta_j - pi/2)) / 2

which is chained analytically through the clamped negative log and the
batch mean.  A central finite-difference evaluator of the same cost is
kept as an independent cross-check, and an adjoint-mode engine computes
the identical gradient in three circuit sweeps for the training loop.
"""
from __future__ import annotations

import math

import numpy as np

from . import circuits, qae, simulator as sim
from .errors import ConfigurationError
from .qae import QaeModel

SHIFT = math.pi / 2

_ROT_APPLY = {"X": sim.apply_rx, "Y": sim.apply_ry, "Z": sim.apply_rz}


def _shifted_model(model: QaeModel, index: tuple[int, ...], delta: float) -> QaeModel:
    theta = model.theta.copy()
    theta[index] += delta
    return QaeModel(model.encoder, theta, model.trash_qubits)


def _check_rotation_only(model: QaeModel) -> None:
    # The circuit family guarantees this; guard against future gate kinds.
    for axis in model.encoder.composition:
        if axis not in ("X", "Y", "Z"):
            raise ConfigurationError(
                f"parameter-shift rule needs Pauli rotations, got {axis!r}")


def cost_and_parameter_shift_gradient(model: QaeModel,
                                      X: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch cost plus its exact gradient via the parameter-shift rule.

    Samples whose probability sits at the clamp floor contribute zero
    gradient: the clamped cost is flat there.
    """
    _check_rotation_only(model)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n_samples = X.shape[0]
    p0 = qae.reconstruction_probabilities(model, X)
    cost = float(np.mean(-np.log(qae.clamp_probability(p0))))
    inv_p = np.where(p0 > qae.PROB_FLOOR, 1.0 / qae.clamp_probability(p0), 0.0)
    grad = np.zeros(model.encoder.parameter_shape)
    for index in np.ndindex(grad.shape):
        p_plus = qae.reconstruction_probabilities(_shifted_model(model, index, SHIFT), X)
        p_minus = qae.reconstruction_probabilities(_shifted_model(model, index, -SHIFT), X)
        dp = (p_plus - p_minus) / 2.0
        grad[index] = -float(inv_p @ dp) / n_samples
    return cost, grad


# ---------------------------------------------------------------------------
# adjoint engine: same gradient in three circuit sweeps
# ---------------------------------------------------------------------------

def _project_trash_zero(amps: np.ndarray, n_qubits: int, trash) -> np.ndarray:
    """M|psi>: zero every amplitude whose trash bits are not all 0."""
    out = np.zeros_like(amps)
    lead = amps.ndim - 1
    src = amps.reshape(amps.shape[:-1] + (2,) * n_qubits)
    dst = out.reshape(out.shape[:-1] + (2,) * n_qubits)
    idx: list = [slice(None)] * (lead + n_qubits)
    for q in trash:
        idx[lead + q] = 0
    dst[tuple(idx)] = src[tuple(idx)]
    return out


def _pauli_overlap(lam: np.ndarray, psi: np.ndarray, n_qubits: int,
                   qubit: int, axis: str) -> np.ndarray:
    """<lam| P_qubit |psi> per batch entry, without materializing P|psi>."""
    l0 = sim._qubit_view(lam, n_qubits, qubit)
    p0 = sim._qubit_view(psi, n_qubits, qubit)
    la, lb = l0[..., 0, :], l0[..., 1, :]
    pa, pb = p0[..., 0, :], p0[..., 1, :]
    sum_axes = (-2, -1)
    if axis == "X":
        val = np.conj(la) * pb + np.conj(lb) * pa
    elif axis == "Y":
        val = np.conj(la) * (-1j * pb) + np.conj(lb) * (1j * pa)
    else:
        val = np.conj(la) * pa - np.conj(lb) * pb
    return np.sum(val, axis=sum_axes)


def cost_and_adjoint_gradient(model: QaeModel,
                              X: np.ndarray) -> tuple[float, np.ndarray]:
    """Identical contract to the parameter-shift version, O(1) circuit sweeps.

    Forward pass builds |psi>; the projector onto the trash-zero subspace
    seeds |lambda>; one backward sweep undoes each gate on both states and
    reads off dp/dtheta_k = Im <lambda| P_k |psi> at every trainable
    rotation (the generator is P/2 and the derivative carries factor 2).
    """
    _check_rotation_only(model)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    qae._check_scaled(X)
    cfg = model.encoder
    n = cfg.n_qubits
    n_samples = X.shape[0]
    program = circuits.circuit_program(cfg)
    grad = np.zeros(cfg.parameter_shape)
    cost_total = 0.0

    chunk = max(1, (1 << 22) >> n)
    for start in range(0, n_samples, chunk):
        block = X[start:start + chunk]

        def angle_of(op):
            source = op[3]
            if source[0] == "x":
                return cfg.embedding_angle_factor * block[:, source[1]]
            return model.theta[source[1:]]

        psi = sim.zero_amplitudes(n, (block.shape[0],))
        for op in program:
            if op[0] == "cnot":
                sim.apply_cnot(psi, n, op[1], op[2])
            else:
                _ROT_APPLY[op[1]](psi, n, op[2], angle_of(op))

        p0 = np.clip(zero_prob := sim.zero_bit_probability(
            psi, n, model.trash_qubits), 0.0, 1.0)
        cost_total += float(np.sum(-np.log(qae.clamp_probability(p0))))
        inv_p = np.where(p0 > qae.PROB_FLOOR,
                         1.0 / qae.clamp_probability(p0), 0.0)

        lam = _project_trash_zero(psi, n, model.trash_qubits)
        for op in reversed(program):
            if op[0] == "cnot":
                sim.apply_cnot(psi, n, op[1], op[2])
                sim.apply_cnot(lam, n, op[1], op[2])
                continue
            _, axis, qubit, source = op
            if source[0] == "theta":
                dp = np.imag(_pauli_overlap(lam, psi, n, qubit, axis))
                grad[source[1:]] += -float(inv_p @ dp)
            angle = angle_of(op)
            _ROT_APPLY[axis](psi, n, qubit, -angle)
            _ROT_APPLY[axis](lam, n, qubit, -angle)

    return cost_total / n_samples, grad / n_samples


def adjoint_gradient(model: QaeModel, X: np.ndarray) -> np.ndarray:
    """Gradient of batch_cost by the adjoint sweep."""
    return cost_and_adjoint_gradient(model, X)[1]


def parameter_shift_gradient(model: QaeModel, X: np.ndarray) -> np.ndarray:
    """Exact gradient of batch_cost via the parameter-shift rule."""
    return cost_and_parameter_shift_gradient(model, X)[1]


def finite_difference_gradient(model: QaeModel, X: np.ndarray,
                               h: float = 1e-4) -> np.ndarray:
    """Central finite differences of batch_cost, one parameter at a time."""
    if not 1e-6 <= h <= 1e-2:
        raise ConfigurationError(f"finite-difference step {h} outside [1e-6, 1e-2]")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    grad = np.zeros(model.encoder.parameter_shape)
    for index in np.ndindex(grad.shape):
        c_plus = qae.batch_cost(_shifted_model(model, index, h), X)
        c_minus = qae.batch_cost(_shifted_model(model, index, -h), X)
        grad[index] = (c_plus - c_minus) / (2.0 * h)
    return grad
