"""Exception hierarchy shared by every fmmd module."""


class FmmdError(Exception):
    """Base class for all errors raised by fmmd."""


class InvalidArgument(FmmdError, ValueError):
    pass


class IncompatibleMesh(FmmdError, ValueError):
    """Two samples, sets or maps live on different meshes."""


class InsufficientData(FmmdError, ValueError):
    pass


class DegenerateSpectrum(FmmdError, ValueError):
    """An empirical covariance has no variance left to explain."""


class DegenerateBandwidth(FmmdError, ValueError):
    """Every pairwise distance is zero so the median heuristic is undefined."""


class DegenerateSNR(FmmdError, ValueError):
    pass


class InvalidOperator(FmmdError, ValueError):
    """Operator is not symmetric PSD, or a commuting assumption fails."""


class NumericalFailure(FmmdError, ArithmeticError):
    pass


class DataError(FmmdError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
