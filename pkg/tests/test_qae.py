"""Reconstruction probability, anomaly score, and batch cost."""
import numpy as np
import pytest

from qae_anomaly import qae
from qae_anomaly.circuits import EncoderConfig
from qae_anomaly.errors import ConfigurationError, DataError, UsageError
from qae_anomaly.qae import QaeModel

import oracles
from conftest import random_encoder_config, random_features, random_parameters


def make_model(rng, max_qubits=5):
    cfg = random_encoder_config(rng, max_qubits=max_qubits)
    theta = random_parameters(rng, cfg)
    k = int(rng.integers(1, cfg.n_qubits + 1))
    return QaeModel.with_trash_count(cfg, theta, k)


def test_zero_layer_zero_input_probability_one():
    cfg = EncoderConfig(n_features=2, layers=0)
    model = QaeModel.with_trash_count(cfg, np.zeros(cfg.parameter_shape), 1)
    assert qae.reconstruction_probability(model, [0.0, 0.0]) == 1.0


def test_full_rotation_empties_trash_qubit():
    """RY(pi) flips qubit 0, so P(qubit 0 reads 0) = 0."""
    cfg = EncoderConfig(n_features=2, layers=0)
    model = QaeModel(cfg, np.zeros(cfg.parameter_shape), (0,))
    p = qae.reconstruction_probability(model, [np.pi, 0.0])
    assert abs(p) < 1e-15


def test_probability_matches_partial_trace_oracle(rng):
    from qae_anomaly import circuits
    for _ in range(40):
        model = make_model(rng)
        x = random_features(rng, model.encoder)[0]
        p = qae.reconstruction_probability(model, x)
        psi = oracles.apply_gates_dense(
            model.encoder.n_qubits,
            circuits.encoder_gates(x, model.theta, model.encoder))
        want = oracles.trash_zero_probability_dense(
            psi, model.encoder.n_qubits, list(model.trash_qubits))
        assert abs(p - want) < 1e-10


def test_probability_bounds_over_random_draws(rng):
    for _ in range(1000):
        model = make_model(rng, max_qubits=4)
        x = random_features(rng, model.encoder)[0]
        p = qae.reconstruction_probability(model, x)
        assert 0.0 <= p <= 1.0


def test_unscaled_input_rejected():
    cfg = EncoderConfig(n_features=2, layers=0)
    model = QaeModel.with_trash_count(cfg, np.zeros(cfg.parameter_shape), 1)
    with pytest.raises(DataError):
        qae.reconstruction_probability(model, [4.0, 0.0])


def test_default_trash_is_last_k():
    cfg = EncoderConfig(n_features=3, layers=1)
    assert qae.default_trash_qubits(cfg, 2) == (1, 2)
    with pytest.raises(ConfigurationError):
        qae.default_trash_qubits(cfg, 0)


# ---------------------------------------------------------------------------
# anomaly score
# ---------------------------------------------------------------------------

def test_score_zero_for_perfect_reconstruction():
    cfg = EncoderConfig(n_features=1, layers=0, reuploading=True)
    model = QaeModel.with_trash_count(cfg, np.zeros(cfg.parameter_shape), 1)
    assert qae.anomaly_score(model, [1.0]) == 0.0


def test_score_log_identity():
    p = np.exp(-2.0)
    assert abs(-np.log(qae.clamp_probability(p)) - 2.0) < 1e-12


def test_score_clamp_policy():
    """p below the floor scores -log(1e-12) ~ 27.631."""
    floor_score = -np.log(qae.clamp_probability(0.0))
    assert abs(floor_score - (-np.log(1e-12))) < 1e-12
    assert abs(floor_score - 27.631021115928547) < 1e-9


def test_score_monotone_in_probability(rng):
    """Score ordering equals ordering by -p, so AUCs agree either way."""
    model = make_model(rng)
    X = random_features(rng, model.encoder, n_samples=50)
    p = qae.reconstruction_probabilities(model, X)
    scores = qae.anomaly_scores(model, X)
    np.testing.assert_array_equal(np.argsort(scores, kind="stable"),
                                  np.argsort(-p, kind="stable"))


# ---------------------------------------------------------------------------
# batch cost
# ---------------------------------------------------------------------------

def test_batch_cost_zero_for_reuploading_zero_layer(rng):
    cfg = EncoderConfig(n_features=2, layers=0, reuploading=True)
    model = QaeModel.with_trash_count(cfg, np.zeros(cfg.parameter_shape), 1)
    X = random_features(rng, cfg, n_samples=10)
    assert qae.batch_cost(model, X) == 0.0


def test_batch_cost_arithmetic_mean():
    """Two samples at p = 1 and p = exp(-1) average to cost 0.5."""
    cfg = EncoderConfig(n_features=1, layers=0)
    model = QaeModel.with_trash_count(cfg, np.zeros(cfg.parameter_shape), 1)
    # p(x) = cos^2(x/2) for a single RY embed; solve for p = exp(-1)
    x_for_p = 2.0 * np.arccos(np.sqrt(np.exp(-1.0)))
    cost = qae.batch_cost(model, np.array([[0.0], [x_for_p]]))
    assert abs(cost - 0.5) < 1e-12


def test_batch_cost_is_mean_of_scores(rng):
    model = make_model(rng)
    X = random_features(rng, model.encoder, n_samples=8)
    scores = [qae.anomaly_score(model, x) for x in X]
    assert abs(qae.batch_cost(model, X) - np.mean(scores)) < 1e-12


def test_batch_cost_empty_batch_rejected(rng):
    model = make_model(rng)
    with pytest.raises(UsageError):
        qae.batch_cost(model, np.zeros((0, model.encoder.n_features)))


def test_batch_cost_permutation_invariant(rng):
    model = make_model(rng)
    X = random_features(rng, model.encoder, n_samples=32)
    base = qae.batch_cost(model, X)
    for _ in range(5):
        perm = rng.permutation(32)
        assert abs(qae.batch_cost(model, X[perm]) - base) < 1e-12
