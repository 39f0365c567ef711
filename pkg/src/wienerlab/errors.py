"""Exception taxonomy shared across the library and mapped to CLI exit codes."""


class WienerlabError(Exception):
    """Base class for all library errors."""


class ShapeError(WienerlabError, ValueError):
    """Mismatched or unsupported signal/filter extents."""


class ConfigError(WienerlabError, ValueError):
    """Invalid configuration: bad parameter value, unknown key, unknown family."""


class FormatError(WienerlabError, ValueError):
    """Malformed data file. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericalError(WienerlabError, ArithmeticError):
    """Numerical failure: divergence, NaN, singular or degenerate system."""


class SingularSystemError(NumericalError):
    """Deconvolution denominator has a zero bin and no stabilizer is active."""


class UndefinedQuotientError(NumericalError):
    """Quotient requested for an all-zero filter."""


class OracleSizeError(WienerlabError, ValueError):
    """Dense reference solver asked to factor a system above its size cap."""
