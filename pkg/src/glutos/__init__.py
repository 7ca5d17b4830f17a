"""Finite presites, sheaves, gluing data, and glutos axiom suites,
all decided by exhaustive search at desk scale."""

from .fincat import (
    ConeWitness,
    FinCategory,
    Functor,
    Diagram,
    InvalidCategory,
    Sink,
    classify_arrow,
    finite_colimit,
    finite_limit,
    is_effective_epi_family,
    validate_category,
)
from .site import (
    CloposStructure,
    NotAPretopology,
    PredicateSite,
    Pretopology,
    apply_operator,
    clopen_arrows,
    induce_pretopology,
    is_locally,
    is_subcanonical,
    validate_pretopology,
)

__all__ = [
    "ConeWitness",
    "FinCategory",
    "Functor",
    "Diagram",
    "InvalidCategory",
    "Sink",
    "classify_arrow",
    "finite_colimit",
    "finite_limit",
    "is_effective_epi_family",
    "validate_category",
    "CloposStructure",
    "NotAPretopology",
    "PredicateSite",
    "Pretopology",
    "apply_operator",
    "clopen_arrows",
    "induce_pretopology",
    "is_locally",
    "is_subcanonical",
    "validate_pretopology",
]

__version__ = "0.1.0"
