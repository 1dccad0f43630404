"""Exact simulation of pulse sequences and sequential measurements on a qubit
coupled to a finite environment, with brute-force checks of their duality."""
from .linalg import (
    DomainError,
    HilbertDims,
    InvariantError,
    ModelSpec,
    ShapeError,
    dephasing_model,
    general_model,
    random_model,
)
from .protocols import Schedule, SignalTable
from .report import Check
from .superop import LinearMap

__all__ = [
    "Check",
    "DomainError",
    "HilbertDims",
    "InvariantError",
    "LinearMap",
    "ModelSpec",
    "Schedule",
    "ShapeError",
    "SignalTable",
    "dephasing_model",
    "general_model",
    "random_model",
]
