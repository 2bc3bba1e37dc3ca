"""Exception types raised across the package."""


class SemifbError(Exception):
    """Base class for all errors raised by semifb."""


class InvalidWeightError(SemifbError, ValueError):
    """A value that is not an element of the semiring (NaN, +inf, negative probability)."""


class ZeroDivisionInSemiring(SemifbError, ZeroDivisionError):
    """Division by the semiring zero element."""


class DimensionMismatchError(SemifbError, ValueError):
    pass


class GraphFormatError(SemifbError, ValueError):
    """Malformed graph text. ``line`` is 1-based, or None for whole-file problems."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidGraphError(SemifbError, ValueError):
    pass


class InfeasibleGraphError(SemifbError, ValueError):
    """Requested (states, arcs) combination cannot be generated."""


class EmptyLatticeError(SemifbError, ValueError):
    """No accepting path has non-zero weight, so the log-marginal is 0̄."""

    def __init__(self, message: str = "empty lattice: no accepting path", member: int | None = None):
        self.member = member
        if member is not None:
            message = f"{message} (batch member {member})"
        super().__init__(message)


class OracleTooLargeError(SemifbError, ValueError):
    pass


class LikelihoodFormatError(SemifbError, ValueError):
    pass
