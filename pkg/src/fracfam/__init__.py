"""Workbench for fractional L-intersecting set families."""
__version__ = "0.1.0"

from .core import (
    Family,
    FamilyError,
    LSet,
    Subset,
    VerificationReport,
    induced_classical_L,
    is_avoiding,
    is_fractional_pair,
    make_fraction,
    uniformity,
    verify_family,
)

__all__ = [
    "Family",
    "FamilyError",
    "LSet",
    "Subset",
    "VerificationReport",
    "induced_classical_L",
    "is_avoiding",
    "is_fractional_pair",
    "make_fraction",
    "uniformity",
    "verify_family",
]
