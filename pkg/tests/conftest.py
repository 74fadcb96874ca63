import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qae_anomaly import circuits
from qae_anomaly.circuits import Embedding, EncoderConfig


def random_encoder_config(rng: np.random.Generator, max_qubits: int = 6,
                          max_layers: int = 3) -> EncoderConfig:
    """Draw a structurally valid encoder config for property tests."""
    embedding = rng.choice(["standard", "parallel", "alternate", "generalized"])
    if embedding == "standard":
        emb = Embedding.standard()
    elif embedding == "parallel":
        emb = Embedding.parallel()
    elif embedding == "alternate":
        emb = Embedding.alternate()
    else:
        d = int(rng.integers(1, 4))
        cycle = tuple(rng.choice(["X", "Y", "Z"], size=int(rng.integers(1, d + 1))))
        emb = Embedding.generalized(d, cycle)
    n_features = int(rng.integers(1, max(2, max_qubits // emb.d) + 1))
    composition = tuple(rng.choice(["X", "Y", "Z"],
                                   size=int(rng.integers(1, 4))))
    return EncoderConfig(
        n_features=n_features,
        embedding=emb,
        layers=int(rng.integers(0, max_layers + 1)),
        composition=composition,
        reuploading=bool(rng.integers(0, 2)),
        entangler_range_policy=str(rng.choice([circuits.RANGE_CYCLE,
                                               circuits.RANGE_ADJACENT])),
        reupload_leading_embed=bool(rng.integers(0, 2)),
    )


def random_parameters(rng: np.random.Generator, cfg: EncoderConfig) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=cfg.parameter_shape)


def random_features(rng: np.random.Generator, cfg: EncoderConfig,
                    n_samples: int = 1) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=(n_samples, cfg.n_features))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
