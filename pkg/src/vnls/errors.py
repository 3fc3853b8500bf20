"""Exception hierarchy shared by all vnls modules."""


class VNLSError(Exception):
    """Base class for every error raised by this package."""


class InvalidGrid(VNLSError, ValueError):
    pass


class ShapeMismatch(VNLSError, ValueError):
    pass


class InvalidField(VNLSError, ValueError):
    pass


class InvalidExponent(VNLSError, ValueError):
    pass


class EmptyTrajectory(VNLSError, ValueError):
    pass


class InadmissiblePair(VNLSError, ValueError):
    pass


class DegenerateExponent(VNLSError, ValueError):
    pass


class MatrixMismatch(VNLSError, ValueError):
    pass


class NotHermitian(VNLSError, ValueError):
    pass


class NotPositive(VNLSError, ValueError):
    pass


class BadEntries(VNLSError, ValueError):
    pass


class TimeZero(VNLSError, ValueError):
    pass


class DegenerateInput(VNLSError, ValueError):
    pass


class MeanNotZero(VNLSError, ValueError):
    pass


class GridTooSmall(VNLSError, ValueError):
    pass


class OutOfRange(VNLSError, ValueError):
    pass


class WindowInvalid(VNLSError, ValueError):
    pass


class BlowupDetected(VNLSError, RuntimeError):
    """Sup-norm exceeded the configured ceiling during time stepping."""

    def __init__(self, message, time=None, sup_norm=None):
        super().__init__(message)
        self.time = time
        self.sup_norm = sup_norm


class NotContracting(VNLSError, RuntimeError):
    """Picard iteration failed to contract; the smallness condition is violated."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(VNLSError, ValueError):
    def __init__(self, message, line=None, column=None, pointer=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.pointer = pointer


class ValidationError(VNLSError, ValueError):
    """Aggregates every validation failure found in a scenario."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ZeroNorm(DegenerateInput, ZeroDivisionError):
    """A quotient's denominator norm vanishes."""
