"""Exceptions and warnings raised across the quench-fidelity package."""

from typing import Optional


class QuenchFidelityError(Exception):
    """Base class for every error raised by this package."""


class GapClosed(QuenchFidelityError):
    """
    The Bloch vector of a k-mode vanishes, so its ground state is undefined.
    This marks an equilibrium critical point rather than a programming error.
    """

    def __init__(self, norm: float, k: Optional[float] = None, message: str = ""):
        self.norm = norm
        self.k = k
        where = f" at k={k!r}" if k is not None else ""
        super().__init__(message or f"gap closed{where}: |d|={norm!r}")


class DomainError(QuenchFidelityError, ValueError):
    """An argument lies outside the domain of an operation."""


class CriticalBoundary(QuenchFidelityError):
    """A parameter sits on an equilibrium critical line where boundary occupations flip."""


class NonIntegerResult(QuenchFidelityError):
    """A quantity that must be an integer did not converge to one."""

    def __init__(self, value: float, samples: int):
        self.value = value
        self.samples = samples
        super().__init__(f"winding integral {value!r} is not an integer after {samples} samples")


class PreconditionFailed(QuenchFidelityError):
    """The hypothesis of an oracle identity does not hold for the given vectors."""


class ConfigError(QuenchFidelityError):
    """Invalid run configuration; `field` names the offending `section.key`."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ResolutionWarning(UserWarning):
    """A root scan bracket held more than one root; results are best-effort."""
