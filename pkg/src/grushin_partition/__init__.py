"""Minimal partitions of the Grushin plane with a trace constraint."""
from .errors import (
    DegenerateInput,
    DomainError,
    FitError,
    GrushinError,
    InfeasibleSpec,
    NonConvergent,
    UnsupportedAlpha,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInput",
    "DomainError",
    "FitError",
    "GrushinError",
    "InfeasibleSpec",
    "NonConvergent",
    "UnsupportedAlpha",
]
