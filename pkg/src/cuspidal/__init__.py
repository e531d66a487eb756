"""Exact p-adic workbench for cuspidal weight modules and their certificates."""

__version__ = "0.1.0"

from .padic import FieldSpec, PadicScalar, PPower, PrecisionLossError

__all__ = ["FieldSpec", "PadicScalar", "PPower", "PrecisionLossError", "__version__"]
