"""Independent brute-force oracles used to cross-check the implementation.

Everything here builds dense matrices or enumerates pairs directly, on
purpose: these paths must stay independent of the bit-mask kernels and
vectorized metrics they validate.  Sizes are kept small (<= 6 qubits for
dense constructions).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """R_P(theta) = expm(-i * theta * P / 2), by direct matrix exponential."""
    return expm(-0.5j * theta * PAULI[axis])


def lift_single(n_qubits: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    """Kronecker-lift a 2x2 matrix onto one qubit (qubit 0 leftmost factor)."""
    out = np.array([[1.0 + 0j]])
    for q in range(n_qubits):
        out = np.kron(out, matrix if q == qubit else IDENTITY2)
    return out


def _basis_bit(index: int, n_qubits: int, qubit: int) -> int:
    return (index >> (n_qubits - 1 - qubit)) & 1


def cnot_matrix(n_qubits: int, control: int, target: int) -> np.ndarray:
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        if _basis_bit(b, n_qubits, control):
            flipped = b ^ (1 << (n_qubits - 1 - target))
            out[flipped, b] = 1.0
        else:
            out[b, b] = 1.0
    return out


def cswap_matrix(n_qubits: int, control: int, a: int, b: int) -> np.ndarray:
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        if _basis_bit(idx, n_qubits, control):
            bit_a = _basis_bit(idx, n_qubits, a)
            bit_b = _basis_bit(idx, n_qubits, b)
            swapped = idx
            if bit_a != bit_b:
                swapped ^= (1 << (n_qubits - 1 - a)) | (1 << (n_qubits - 1 - b))
            out[swapped, idx] = 1.0
        else:
            out[idx, idx] = 1.0
    return out


def gate_matrix(n_qubits: int, kind: str, qubits: tuple[int, ...],
                angle: float | None = None) -> np.ndarray:
    if kind in ("RX", "RY", "RZ"):
        return lift_single(n_qubits, qubits[0], rotation_matrix(kind[1], angle))
    if kind == "H":
        return lift_single(n_qubits, qubits[0], HADAMARD)
    if kind == "CNOT":
        return cnot_matrix(n_qubits, *qubits)
    if kind == "CSWAP":
        return cswap_matrix(n_qubits, *qubits)
    raise ValueError(kind)


def apply_gates_dense(n_qubits: int, gates, amplitudes=None) -> np.ndarray:
    """Run a gate list by full matrix-vector products."""
    if amplitudes is None:
        amplitudes = np.zeros(1 << n_qubits, dtype=complex)
        amplitudes[0] = 1.0
    psi = np.asarray(amplitudes, dtype=complex).copy()
    for gate in gates:
        psi = gate_matrix(n_qubits, gate.kind, gate.qubits, gate.angle) @ psi
    return psi


def partial_trace_keep(psi: np.ndarray, n_qubits: int, keep: list[int]) -> np.ndarray:
    """Reduced density matrix over ``keep`` (sorted), tracing out the rest."""
    keep = sorted(keep)
    rest = [q for q in range(n_qubits) if q not in keep]
    tensor = psi.reshape((2,) * n_qubits)
    perm = keep + rest
    tensor = np.transpose(tensor, perm)
    mat = tensor.reshape(1 << len(keep), 1 << len(rest))
    return mat @ mat.conj().T


def trash_zero_probability_dense(psi: np.ndarray, n_qubits: int,
                                 trash: list[int]) -> float:
    """<0...0| Tr_rest(|psi><psi|) |0...0> via the dense partial trace."""
    rho = partial_trace_keep(psi, n_qubits, sorted(trash))
    return float(np.real(rho[0, 0]))


def mann_whitney_auc(scores, labels) -> float:
    """Pairwise AUC: anomaly-vs-normal wins plus half ties."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))
