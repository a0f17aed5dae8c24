"""Exception types shared across the package."""


class CssnmfError(Exception):
    """Base class for errors raised by this package."""


class DataError(CssnmfError):
    """Malformed or dimensionally inconsistent input data."""


class NumericalError(CssnmfError):
    """A numerical routine failed (non-convergence, rank deficiency, ...)."""
