"""
Semantic error types for the library.

These replace bare ValueError/RuntimeError so that callers (and the CLI exit
codes) can tell a bad input from a numerical failure.
"""

from typing import Any


class CarnotError(Exception):
    """Base exception for all errors."""

    pass


class StructuralError(CarnotError):
    """
    Objects built over different algebras were combined, or structure
    constants violate the H-type relations.
    """

    def __init__(self, message: str = "Points or objects belong to different algebras"):
        super().__init__(message)


class DomainError(CarnotError):
    """
    A parameter lies outside the domain of the operation.

    Raised for non-positive dilation factors, inadmissible subalgebra shapes,
    degenerate grids and similar input problems.
    """

    def __init__(self, message: str = "Parameter outside the admissible domain"):
        super().__init__(message)


class UnsupportedError(CarnotError):
    """The operation is not implemented for this algebra kind."""

    def __init__(self, message: str = "Operation not supported for this algebra kind"):
        super().__init__(message)


class UnsupportedExponentError(UnsupportedError):
    """
    The convex solver was asked for p < 1.

    Exceptionality for 0 < p < 1 goes through the witness functions in
    `carnotmod.modulus.witness` instead.
    """

    def __init__(
        self,
        message: str = "p < 1 is not solved; use a witness function instead",
    ):
        super().__init__(message)


class SolverError(CarnotError):
    """
    The modulus solver did not reach the requested KKT tolerance.

    Contains the solver diagnostics for inspection.
    """

    def __init__(self, message: str, info: dict[str, Any] | None = None):
        super().__init__(message)
        self.info = info or {}


class ValidationError(CarnotError):
    """
    Experiment configuration failed validation.

    Contains the original Pydantic validation errors for inspection.
    """

    def __init__(self, message: str, pydantic_errors: Any = None):
        super().__init__(message)
        self.pydantic_errors = pydantic_errors or []
