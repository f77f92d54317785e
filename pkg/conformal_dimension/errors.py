"""Exceptions raised by the conformal-dimension modules.

Every error names the module that raised it and carries the exit status the CLI
reports for it.
"""
from __future__ import annotations

import typing as t

from .constants import ExitStatus

__all__ = (
    "ConformalDimensionError",
    "DomainError",
    "NumericError",
    "ConvergenceError",
    "ResourceError",
    "VerificationError",
)


class ConformalDimensionError(Exception):
    exit_code: t.ClassVar[ExitStatus] = ExitStatus.DOMAIN

    def __init__(self, module: str, message: str):
        self.module = module
        self.message = message
        super().__init__(f"[{module}] {message}")


class DomainError(ConformalDimensionError):
    """A mathematical precondition does not hold."""


class NumericError(DomainError):
    """A computation left the range floating point can represent."""


class ConvergenceError(NumericError):
    """An iterative method stopped before meeting its tolerance."""

    def __init__(self, module: str, message: str, *, best: t.Optional[float] = None):
        self.best = best
        if best is not None:
            message = f"{message} (best so far: {best:.12g})"
        super().__init__(module, message)


class ResourceError(ConformalDimensionError):
    """A requested enumeration exceeds its configured budget."""

    exit_code = ExitStatus.RESOURCE

    def __init__(self, module: str, message: str, *, requested: int, bound: int):
        self.requested = requested
        self.bound = bound
        super().__init__(module, f"{message}: requested {requested}, budget {bound}")


class VerificationError(ConformalDimensionError):
    exit_code = ExitStatus.VERIFICATION
