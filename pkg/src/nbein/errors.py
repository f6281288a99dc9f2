"""Exception hierarchy shared by every module."""


class NbeinError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(NbeinError, ValueError):
    pass


class NotHermitian(NbeinError, ValueError):
    pass


class NoConvergence(NbeinError, RuntimeError):
    pass


class DimensionTooSmall(NbeinError, ValueError):
    pass


class UnsupportedDescriptor(NbeinError, ValueError):
    pass


class DSLSyntaxError(NbeinError, ValueError):
    """Malformed Hamiltonian-family text; carries a 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownSymbol(DSLSyntaxError):
    pass


class SymArityError(DSLSyntaxError):
    pass


class DomainViolation(NbeinError, ValueError):
    pass


class DegenerateSpectrum(NbeinError, ValueError):
    pass


class DegeneratePair(DegenerateSpectrum):
    pass


class AmbiguousMatch(NbeinError, RuntimeError):
    pass


class SingularMetric(NbeinError, ValueError):
    pass


class ConfigError(NbeinError, ValueError):
    pass
