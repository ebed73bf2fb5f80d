"""Exact simulation toolkit for N<=2 supersymmetric quantum mechanics on qubits."""

__version__ = "0.1.0"

from .errors import ArgumentError, NumericalIntegrityError, SusyError, ValidationError
from .fockalg import SparseOperator
from .models import Graph, hardcore_model, syk_model
from .susycore import SusyModel, validate

__all__ = [
    "ArgumentError",
    "Graph",
    "NumericalIntegrityError",
    "SparseOperator",
    "SusyError",
    "SusyModel",
    "ValidationError",
    "hardcore_model",
    "syk_model",
    "validate",
]
