"""Exception types shared by the library and mapped to CLI exit codes."""


class UltraError(Exception):
    """Base class for errors raised by this package."""


class InvalidInput(UltraError, ValueError):
    """Malformed data: bad JSON shape, unknown point, out-of-range radius."""


class SizeCapError(InvalidInput):
    """An exhaustive oracle was asked to run beyond its size cap."""


class HypothesisError(UltraError):
    """A mathematical precondition does not hold.

    ``citation`` names the statement whose hypothesis failed and ``level``
    (when relevant) the first level at which it was observed.
    """

    def __init__(self, message, citation=None, level=None):
        super().__init__(message)
        self.citation = citation
        self.level = level


class InsufficientDepth(HypothesisError):
    """The hypothesis holds symbolically but the bounded search ran out."""


class FiniteDegreeError(HypothesisError):
    """The infinite-degree construction was fed finite degrees."""


class DegenerateClassError(HypothesisError):
    """Empty or bounded classes that bypass the general constructions."""


class VerificationError(UltraError):
    """A certificate was rejected."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
