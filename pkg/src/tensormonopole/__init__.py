"""Numerics for SO(2) tensor monopoles: model, quantum geometry, invariants and a measurement simulator."""

from .errors import (
    ConfigError,
    DegeneracyCollision,
    FitFailure,
    FrameBreakdown,
    MeshTooCoarse,
    NonRotationalSymmetry,
    NotRealizable,
    NumericalFailure,
    StepTooCoarse,
    TailTooFat,
    TensorMonopoleError,
)
from .model import Family, HyperPoint, ModelSpec, Momentum4, build_hamiltonian, certify_symmetries

__all__ = [
    "ConfigError",
    "DegeneracyCollision",
    "FitFailure",
    "FrameBreakdown",
    "MeshTooCoarse",
    "NonRotationalSymmetry",
    "NotRealizable",
    "NumericalFailure",
    "StepTooCoarse",
    "TailTooFat",
    "TensorMonopoleError",
    "Family",
    "HyperPoint",
    "ModelSpec",
    "Momentum4",
    "build_hamiltonian",
    "certify_symmetries",
]
