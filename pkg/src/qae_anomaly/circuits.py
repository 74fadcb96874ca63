"""Encoder circuit construction: data embedding, entangling layers, assembly.

An encoder is fully determined by an :class:`EncoderConfig`.  The circuit
structure is materialized once as an abstract program (rotations whose
angles reference either a feature or a trainable parameter, plus CNOTs),
which is then interpreted either against a batch of samples (fast path)
or into a concrete :class:`~qae_anomaly.simulator.Gate` list.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import simulator as sim
from .errors import ConfigurationError
from .simulator import Gate, StateVector

AXES = ("X", "Y", "Z")

# range policies for the CNOT ring of an entangling layer
RANGE_CYCLE = "cycle"      # r = (layer_index mod (n_qubits - 1)) + 1
RANGE_ADJACENT = "adjacent"  # always r = 1


@dataclass(frozen=True)
class Embedding:
    """Angle-embedding scheme: each feature drives d adjacent qubits.

    Qubit offset j within a feature block rotates about
    ``pauli_cycle[j % len(pauli_cycle)]``.  The named variants are fixed
    specializations of the generalized scheme and share its code path.
    """

    d: int
    pauli_cycle: tuple[str, ...]
    name: str = "generalized"

    def __post_init__(self):
        if self.d < 1:
            raise ConfigurationError(f"embedding dimension must be >= 1, got {self.d}")
        if not self.pauli_cycle:
            raise ConfigurationError("pauli_cycle must be nonempty")
        for axis in self.pauli_cycle:
            if axis not in AXES:
                raise ConfigurationError(f"unknown Pauli axis {axis!r}")

    @staticmethod
    def standard() -> "Embedding":
        return Embedding(1, ("Y",), "standard")

    @staticmethod
    def parallel() -> "Embedding":
        return Embedding(2, ("Y", "Y"), "parallel")

    @staticmethod
    def alternate() -> "Embedding":
        return Embedding(2, ("Y", "X"), "alternate")

    @staticmethod
    def generalized(d: int, pauli_cycle: Sequence[str]) -> "Embedding":
        return Embedding(d, tuple(pauli_cycle), "generalized")


def parse_composition(text: str) -> tuple[str, ...]:
    """Parse a rotation composition string such as "Y" or "YXY"."""
    comp = tuple(text.upper())
    if not comp:
        raise ConfigurationError("composition must be nonempty")
    for axis in comp:
        if axis not in AXES:
            raise ConfigurationError(f"composition axis {axis!r} not in {AXES}")
    return comp


@dataclass(frozen=True)
class EncoderConfig:
    """Everything that determines the encoder circuit.

    ``embedding_angle_factor`` scales the embedded angles: 1.0 rotates by
    R_P(x) (the common toolkit convention), 2.0 by R_P(2x).
    ``reupload_leading_embed`` controls whether a reuploading encoder
    embeds before the first layer as well (the usual toolkit loop, and the
    form that reproduces the benchmark contrasts) or only between layers.
    """

    n_features: int
    embedding: Embedding = field(default_factory=Embedding.standard)
    layers: int = 4
    composition: tuple[str, ...] = ("Y",)
    reuploading: bool = False
    entangler_range_policy: str = RANGE_CYCLE
    embedding_angle_factor: float = 1.0
    reupload_leading_embed: bool = True

    def __post_init__(self):
        if self.n_features < 1:
            raise ConfigurationError("n_features must be >= 1")
        if self.layers < 0:
            raise ConfigurationError("layers must be >= 0")
        if not self.composition:
            raise ConfigurationError("composition must be nonempty")
        for axis in self.composition:
            if axis not in AXES:
                raise ConfigurationError(f"composition axis {axis!r} not in {AXES}")
        if self.entangler_range_policy not in (RANGE_CYCLE, RANGE_ADJACENT):
            raise ConfigurationError(
                f"unknown entangler range policy {self.entangler_range_policy!r}")
        if self.n_qubits > sim.MAX_QUBITS:
            raise ConfigurationError(
                f"encoder needs {self.n_qubits} qubits, budget is {sim.MAX_QUBITS}")

    @property
    def n_qubits(self) -> int:
        return self.embedding.d * self.n_features

    @property
    def parameter_shape(self) -> tuple[int, int, int]:
        return (self.layers, self.n_qubits, len(self.composition))

    @property
    def parameter_count(self) -> int:
        return self.layers * self.n_qubits * len(self.composition)


def qubit_count(cfg: EncoderConfig) -> int:
    """Register width d * n_features."""
    return cfg.n_qubits


def entangler_range(cfg: EncoderConfig, layer_index: int) -> int:
    if cfg.entangler_range_policy == RANGE_ADJACENT:
        return 1
    return (layer_index % (cfg.n_qubits - 1)) + 1


def init_parameter_array(cfg: EncoderConfig) -> np.ndarray:
    """All-zero parameter array with the config's (L, n_qubits, comp) shape."""
    return np.zeros(cfg.parameter_shape)


def validate_parameters(cfg: EncoderConfig, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != cfg.parameter_shape:
        raise ConfigurationError(
            f"parameter shape {theta.shape} does not match {cfg.parameter_shape}")
    if theta.size and not np.all(np.isfinite(theta)):
        raise ConfigurationError("parameters must be finite")
    return theta


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

_ROT_APPLY = {"X": sim.apply_rx, "Y": sim.apply_ry, "Z": sim.apply_rz}


def embed(state: StateVector, x: Sequence[float], kind: Embedding,
          angle_factor: float = 1.0) -> StateVector:
    """Apply the data-embedding block for one sample, in place."""
    x = np.asarray(x, dtype=float)
    if state.n_qubits != kind.d * x.size:
        raise ConfigurationError(
            f"register has {state.n_qubits} qubits but embedding of "
            f"{x.size} features needs {kind.d * x.size}")
    for i in range(x.size):
        for j in range(kind.d):
            axis = kind.pauli_cycle[j % len(kind.pauli_cycle)]
            _ROT_APPLY[axis](state.amplitudes, state.n_qubits,
                             kind.d * i + j, angle_factor * x[i])
    return state


def entangling_layer(state: StateVector, theta_layer: np.ndarray,
                     composition: Sequence[str], layer_index: int,
                     range_policy: str = RANGE_CYCLE) -> StateVector:
    """One strongly-entangling layer: per-qubit rotations, then a CNOT ring.

    ``theta_layer`` is shaped (n_qubits, len(composition)); rotations are
    applied in composition order.  The ring connects q -> (q + r) mod n
    with r set by the range policy; a single-qubit register skips the ring.
    """
    n = state.n_qubits
    theta_layer = np.asarray(theta_layer, dtype=float)
    if theta_layer.shape != (n, len(composition)):
        raise ConfigurationError(
            f"layer parameters shaped {theta_layer.shape}, "
            f"expected {(n, len(composition))}")
    for q in range(n):
        for slot, axis in enumerate(composition):
            _ROT_APPLY[axis](state.amplitudes, n, q, theta_layer[q, slot])
    if n >= 2:
        if range_policy == RANGE_ADJACENT:
            r = 1
        else:
            r = (layer_index % (n - 1)) + 1
        for q in range(n):
            sim.apply_cnot(state.amplitudes, n, q, (q + r) % n)
    return state


# ---------------------------------------------------------------------------
# circuit program: structure shared by every interpretation
# ---------------------------------------------------------------------------

# ops: ("rot", axis, qubit, ("x", feature)) | ("rot", axis, qubit, ("theta", l, q, slot))
#      | ("cnot", control, target)

def circuit_program(cfg: EncoderConfig) -> list[tuple]:
    ops: list[tuple] = []
    n = cfg.n_qubits

    def embed_block():
        for i in range(cfg.n_features):
            for j in range(cfg.embedding.d):
                axis = cfg.embedding.pauli_cycle[j % len(cfg.embedding.pauli_cycle)]
                ops.append(("rot", axis, cfg.embedding.d * i + j, ("x", i)))

    def layer_block(layer: int):
        for q in range(n):
            for slot, axis in enumerate(cfg.composition):
                ops.append(("rot", axis, q, ("theta", layer, q, slot)))
        if n >= 2:
            r = entangler_range(cfg, layer)
            for q in range(n):
                ops.append(("cnot", q, (q + r) % n))

    if cfg.reuploading:
        if cfg.reupload_leading_embed and cfg.layers > 0:
            embed_block()
        for layer in range(cfg.layers):
            if layer > 0:
                embed_block()
            layer_block(layer)
    else:
        embed_block()
        for layer in range(cfg.layers):
            layer_block(layer)
    return ops


def consumed_parameter_count(cfg: EncoderConfig) -> int:
    """Number of distinct trainable angles the built circuit reads."""
    refs = {op[3][1:] for op in circuit_program(cfg)
            if op[0] == "rot" and op[3][0] == "theta"}
    return len(refs)


def encoder_gates(x: Sequence[float], theta: np.ndarray,
                  cfg: EncoderConfig) -> list[Gate]:
    """Materialize the encoder as a concrete gate list for one sample."""
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.n_features,):
        raise ConfigurationError(
            f"sample has shape {x.shape}, expected ({cfg.n_features},)")
    theta = validate_parameters(cfg, theta)
    gates = []
    for op in circuit_program(cfg):
        if op[0] == "cnot":
            gates.append(Gate("CNOT", (op[1], op[2])))
        else:
            _, axis, qubit, source = op
            if source[0] == "x":
                angle = cfg.embedding_angle_factor * x[source[1]]
            else:
                angle = theta[source[1], source[2], source[3]]
            gates.append(Gate("R" + axis, (qubit,), float(angle)))
    return gates


def encode_batch(X: np.ndarray, theta: np.ndarray, cfg: EncoderConfig) -> np.ndarray:
    """Encode a batch of samples at once; returns amplitudes (B, 2**n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != cfg.n_features:
        raise ConfigurationError(
            f"batch has {X.shape[1]} features, expected {cfg.n_features}")
    theta = validate_parameters(cfg, theta)
    n = cfg.n_qubits
    amps = sim.zero_amplitudes(n, (X.shape[0],))
    for op in circuit_program(cfg):
        if op[0] == "cnot":
            sim.apply_cnot(amps, n, op[1], op[2])
        else:
            _, axis, qubit, source = op
            if source[0] == "x":
                angle = cfg.embedding_angle_factor * X[:, source[1]]
            else:
                angle = theta[source[1], source[2], source[3]]
            _ROT_APPLY[axis](amps, n, qubit, angle)
    return amps


def encode(x: Sequence[float], theta: np.ndarray, cfg: EncoderConfig) -> StateVector:
    """Encode one sample into a fresh register."""
    amps = encode_batch(np.asarray(x, dtype=float)[None, :], theta, cfg)
    return StateVector(cfg.n_qubits, amps[0])


def with_layers(cfg: EncoderConfig, layers: int) -> EncoderConfig:
    return replace(cfg, layers=layers)
