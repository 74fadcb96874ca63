"""Exact complex statevector simulation.

Conventions, fixed project-wide:

* Qubit 0 is the most significant bit of the basis index: in an n-qubit
  register the bit of qubit ``q`` in basis index ``b`` is
  ``(b >> (n - 1 - q)) & 1``.
* Rotation gates follow ``R_P(theta) = exp(-i * theta * P / 2)`` for
  Pauli ``P``.

Gates are applied in place with bit-mask index arithmetic over the
amplitude array; no ``2**n x 2**n`` matrices are built here.  Every kernel
accepts an amplitude array of shape ``(..., 2**n_qubits)`` whose leading
axes, if any, index independent states, so a batch of samples is simulated
with one call per gate.  Rotation angles may be scalars or arrays
broadcastable over those leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CircuitError, ConfigurationError, ResourceError

MAX_QUBITS = 24

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATION_KINDS + ("H", "CNOT", "CSWAP")

_SQRT2_INV = 1.0 / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# kernels (in place, batched)
# ---------------------------------------------------------------------------

def _qubit_view(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """View with the target qubit isolated: (..., 2**q, 2, 2**(n-1-q))."""
    lead = amps.shape[:-1]
    return amps.reshape(lead + (1 << qubit, 2, 1 << (n_qubits - 1 - qubit)))


def _broadcast_angle(value: np.ndarray | float) -> np.ndarray | float:
    """Append the two qubit axes so a per-sample angle broadcasts cleanly."""
    arr = np.asarray(value)
    if arr.ndim == 0:
        return arr
    return arr.reshape(arr.shape + (1, 1))


def apply_rx(amps: np.ndarray, n_qubits: int, qubit: int, theta) -> None:
    half = np.asarray(theta, dtype=float) / 2.0
    c = _broadcast_angle(np.cos(half))
    s = _broadcast_angle(np.sin(half))
    v = _qubit_view(amps, n_qubits, qubit)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - 1j * s * a1
    v[..., 1, :] = -1j * s * a0 + c * a1


def apply_ry(amps: np.ndarray, n_qubits: int, qubit: int, theta) -> None:
    half = np.asarray(theta, dtype=float) / 2.0
    c = _broadcast_angle(np.cos(half))
    s = _broadcast_angle(np.sin(half))
    v = _qubit_view(amps, n_qubits, qubit)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - s * a1
    v[..., 1, :] = s * a0 + c * a1


def apply_rz(amps: np.ndarray, n_qubits: int, qubit: int, theta) -> None:
    half = np.asarray(theta, dtype=float) / 2.0
    phase = _broadcast_angle(np.exp(-1j * half))
    v = _qubit_view(amps, n_qubits, qubit)
    v[..., 0, :] *= phase
    v[..., 1, :] *= np.conj(phase)


def apply_h(amps: np.ndarray, n_qubits: int, qubit: int) -> None:
    v = _qubit_view(amps, n_qubits, qubit)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = (a0 + a1) * _SQRT2_INV
    v[..., 1, :] = (a0 - a1) * _SQRT2_INV


def _tensor_index(amps: np.ndarray, n_qubits: int, fixed: dict[int, int]):
    """Tensor view of the register plus an index tuple pinning qubit bits."""
    lead = amps.ndim - 1
    view = amps.reshape(amps.shape[:-1] + (2,) * n_qubits)
    idx: list = [slice(None)] * (lead + n_qubits)
    for q, bit in fixed.items():
        idx[lead + q] = bit
    return view, idx, lead


def apply_cnot(amps: np.ndarray, n_qubits: int, control: int, target: int) -> None:
    view, idx, lead = _tensor_index(amps, n_qubits, {control: 1})
    i0 = list(idx)
    i1 = list(idx)
    i0[lead + target] = 0
    i1[lead + target] = 1
    i0, i1 = tuple(i0), tuple(i1)
    tmp = view[i0].copy()
    view[i0] = view[i1]
    view[i1] = tmp


def apply_cswap(amps: np.ndarray, n_qubits: int, control: int, a: int, b: int) -> None:
    view, idx, lead = _tensor_index(amps, n_qubits, {control: 1})
    i01 = list(idx)
    i10 = list(idx)
    i01[lead + a] = 0
    i01[lead + b] = 1
    i10[lead + a] = 1
    i10[lead + b] = 0
    i01, i10 = tuple(i01), tuple(i10)
    tmp = view[i01].copy()
    view[i01] = view[i10]
    view[i10] = tmp


def zero_amplitudes(n_qubits: int, batch_shape: tuple[int, ...] = ()) -> np.ndarray:
    """|0...0> amplitudes, optionally replicated over leading batch axes."""
    amps = np.zeros(batch_shape + (1 << n_qubits,), dtype=complex)
    amps[..., 0] = 1.0
    return amps


def zero_bit_probability(amps: np.ndarray, n_qubits: int,
                         qubits: Sequence[int]) -> np.ndarray | float:
    """Probability that every listed qubit reads 0, per batch entry."""
    lead = amps.ndim - 1
    view = amps.reshape(amps.shape[:-1] + (2,) * n_qubits)
    idx: list = [slice(None)] * (lead + n_qubits)
    for q in qubits:
        idx[lead + q] = 0
    sub = view[tuple(idx)]
    axes = tuple(range(lead, sub.ndim))
    return np.sum(np.abs(sub) ** 2, axis=axes)


# ---------------------------------------------------------------------------
# gate / state objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    """A single gate: rotation kinds carry an angle, the rest do not.

    Qubit tuples are (target,) for single-qubit gates, (control, target)
    for CNOT and (control, a, b) for CSWAP.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        expected = {"RX": 1, "RY": 1, "RZ": 1, "H": 1, "CNOT": 2, "CSWAP": 3}[self.kind]
        if len(self.qubits) != expected:
            raise CircuitError(
                f"{self.kind} takes {expected} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind} qubit indices collide: {self.qubits}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise CircuitError(f"{self.kind} requires an angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} does not take an angle")

    def inverse(self) -> "Gate":
        """Inverse gate: negated angle for rotations, self for the rest."""
        if self.kind in ROTATION_KINDS:
            return Gate(self.kind, self.qubits, -self.angle)
        return self


@dataclass
class StateVector:
    """Complex amplitudes of an n-qubit register (qubit 0 = most significant)."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def init_zero(n_qubits: int) -> StateVector:
    """Fresh |0...0> register."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    return StateVector(n_qubits, zero_amplitudes(n_qubits))


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate in place and return the same state."""
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise CircuitError(
                f"{gate.kind} qubit {q} out of range for {n}-qubit register")
    amps = state.amplitudes
    if gate.kind == "RX":
        apply_rx(amps, n, gate.qubits[0], gate.angle)
    elif gate.kind == "RY":
        apply_ry(amps, n, gate.qubits[0], gate.angle)
    elif gate.kind == "RZ":
        apply_rz(amps, n, gate.qubits[0], gate.angle)
    elif gate.kind == "H":
        apply_h(amps, n, gate.qubits[0])
    elif gate.kind == "CNOT":
        apply_cnot(amps, n, gate.qubits[0], gate.qubits[1])
    else:  # CSWAP
        apply_cswap(amps, n, gate.qubits[0], gate.qubits[1], gate.qubits[2])
    return state


def apply_circuit(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    for gate in gates:
        apply_gate(state, gate)
    return state


def trash_zero_probability(state: StateVector, trash_qubits: Sequence[int]) -> float:
    """Probability of reading 0 on every trash qubit simultaneously."""
    trash = sorted(set(trash_qubits))
    if not trash:
        raise ConfigurationError("trash qubit set must be nonempty")
    if trash[0] < 0 or trash[-1] >= state.n_qubits:
        raise ConfigurationError(
            f"trash qubits {trash} out of range for {state.n_qubits} qubits")
    p = float(zero_bit_probability(state.amplitudes, state.n_qubits, trash))
    return min(max(p, 0.0), 1.0)


def swap_test_probability(prep_gates: Sequence[Gate], n_qubits: int,
                          trash_qubits: Sequence[int]) -> float:
    """Ancilla-zero probability of a SWAP test against fresh |0> references.

    ``prep_gates`` prepare the state under test on qubits 0..n_qubits-1.
    One reference qubit per trash qubit plus one ancilla are appended, so
    the full register holds ``n_qubits + len(trash) + 1`` qubits.  The
    returned probability satisfies P(0) = (1 + p) / 2 where p is the
    trash-zero probability of the prepared state.
    """
    trash = sorted(set(trash_qubits))
    if not trash:
        raise ConfigurationError("trash qubit set must be nonempty")
    if trash[0] < 0 or trash[-1] >= n_qubits:
        raise ConfigurationError(
            f"trash qubits {trash} out of range for {n_qubits} qubits")
    total = n_qubits + len(trash) + 1
    if total > MAX_QUBITS:
        raise ResourceError(
            f"SWAP test needs {total} qubits, budget is {MAX_QUBITS}")
    ancilla = total - 1
    state = init_zero(total)
    apply_circuit(state, prep_gates)
    apply_gate(state, Gate("H", (ancilla,)))
    for offset, t in enumerate(trash):
        apply_gate(state, Gate("CSWAP", (ancilla, t, n_qubits + offset)))
    apply_gate(state, Gate("H", (ancilla,)))
    return float(zero_bit_probability(state.amplitudes, total, [ancilla]))
