"""Exception types raised by the gait pipeline.

Every error carries enough context to name the failing contract; the CLI maps
``InputError`` subclasses to exit code 2 and everything else to exit code 3.
"""

from __future__ import annotations


class GaitError(Exception):
    """Base class for all pipeline errors."""


class InputError(GaitError, ValueError):
    """The caller supplied data or parameters that violate a precondition."""


# --- ingestion --------------------------------------------------------------

class MalformedRow(InputError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"MalformedRow line {line}: {reason}")


class NonMonotoneTime(InputError):
    def __init__(self, side: str, index: int, line: int | None = None):
        self.side = side
        self.index = index
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"NonMonotoneTime: foot {side} sample {index}{where}")


class OutOfRangeValue(InputError):
    def __init__(self, line: int, column: str, value: float):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"OutOfRangeValue line {line}: {column}={value!r} outside [0, 1]")


class EmptyStream(InputError):
    pass


# --- filters ----------------------------------------------------------------

class InvalidCutoff(InputError):
    pass


class EvenTaps(InputError):
    pass


class InvalidSigma(InputError):
    pass


class TooShort(InputError):
    pass


# --- detection --------------------------------------------------------------

class WindowOutOfBounds(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DegenerateTriple(InputError):
    pass


class EmptyCandidates(InputError):
    pass


class NoCandidates(GaitError):
    """No usable corner in the candidate window (clipped away or constant curve)."""


# --- parameters -------------------------------------------------------------

class NoBilateralOverlap(GaitError):
    pass


class InsufficientEvents(GaitError):
    pass


class NoAnchors(GaitError):
    pass


class InsufficientAnchors(GaitError):
    pass


class ZeroDuration(InputError):
    pass


# --- synthesis / service ----------------------------------------------------

class DurationTooShort(InputError):
    pass


class BindFailure(InputError):
    pass


class ConfigError(InputError):
    pass


class InvalidSession(InputError):
    """The session violates a data-model invariant (see the attached diagnostics)."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid session: " + "; ".join(str(d) for d in self.diagnostics))
