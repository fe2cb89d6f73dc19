"""Coarse classification of ultrametric spaces.

Symbolic cardinals, finite and sequence ultrametric spaces, towers and
their morphisms, multi-map certificates, and the capacity invariants that
decide coarse equivalence of homogeneous ultrametric spaces.
"""
from .cardinal import Aleph, Cardinal, CardinalSeq, Constant, Finite, UnboundedFinite
from .errors import (DegenerateClassError, FiniteDegreeError, HypothesisError,
                     InsufficientDepth, InvalidInput, SizeCapError, UltraError,
                     VerificationError)
from .kernels import BACKEND_NAME
from .space import FiniteUltraSpace, SequenceSpace, group_chain_space

__version__ = "0.1.0"

__all__ = [
    "Aleph", "Cardinal", "CardinalSeq", "Constant", "Finite", "UnboundedFinite",
    "DegenerateClassError", "FiniteDegreeError", "HypothesisError", "InsufficientDepth",
    "InvalidInput", "SizeCapError", "UltraError", "VerificationError",
    "BACKEND_NAME", "FiniteUltraSpace", "SequenceSpace", "group_chain_space",
]
