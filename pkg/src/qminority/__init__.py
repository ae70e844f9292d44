"""Exact analysis of the four-player minority / anti-minority quantum game."""
from .errors import ConstructionError, DomainError, ValidationError
from .rules import GameKind, Question, QuestionList
from .strategies import (
    ClassicalAssignment,
    ClassicalMixture,
    QuantumStrategy,
    RotationParams,
    TwoOutcomePOVM,
    canonical_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "ClassicalAssignment",
    "ClassicalMixture",
    "ConstructionError",
    "DomainError",
    "GameKind",
    "QuantumStrategy",
    "Question",
    "QuestionList",
    "RotationParams",
    "TwoOutcomePOVM",
    "ValidationError",
    "canonical_strategy",
]
