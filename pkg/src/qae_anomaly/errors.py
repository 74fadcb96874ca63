"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: configuration/usage problems exit 1,
data problems exit 2, numeric failures exit 3.
"""


class QaeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QaeError):
    """Invalid configuration value (qubit counts, embeddings, shapes)."""


class CircuitError(QaeError):
    """Invalid gate specification (bad indices, control/target collision)."""


class ResourceError(QaeError):
    """Simulation would exceed the qubit budget."""


class DataError(QaeError):
    """Bad input data: unscaled features, ingestion failures."""


class UsageError(QaeError):
    """Operation called with unusable arguments (empty batch, single-class labels)."""


class NumericError(QaeError):
    """Numerical failure during optimization (non-finite gradient)."""
