"""Exception taxonomy shared across the package.

Errors fall into a small number of categories so the CLI can map them
to exit codes without inspecting messages.
"""
from __future__ import annotations


class DistillError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DistillError, ValueError):
    """Invalid hyperparameter or run configuration (e.g. T <= 0, n > k)."""


class InputError(DistillError, ValueError):
    """Invalid or incomplete runtime input (NaN logits, missing fields, bad labels)."""


class DimensionError(InputError):
    """Shape or length mismatch between related arrays."""


class DataError(DistillError, ValueError):
    """Malformed dataset, repository, or checkpoint file."""


class TrainingDivergenceError(DistillError, RuntimeError):
    """Training produced non-finite losses, gradients, or parameters."""
