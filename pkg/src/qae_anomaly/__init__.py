"""Quantum-autoencoder anomaly detection on an exact statevector simulator."""

from .circuits import Embedding, EncoderConfig
from .datasets import LabeledDataset, ScalerParams
from .errors import (CircuitError, ConfigurationError, DataError, NumericError,
                     QaeError, ResourceError, UsageError)
from .qae import QaeModel
from .training import TrainConfig, TrainReport

__all__ = [
    "Embedding",
    "EncoderConfig",
    "LabeledDataset",
    "ScalerParams",
    "QaeModel",
    "TrainConfig",
    "TrainReport",
    "QaeError",
    "ConfigurationError",
    "CircuitError",
    "ResourceError",
    "DataError",
    "UsageError",
    "NumericError",
]

__version__ = "0.1.0"
