"""Exception types raised across the package."""


class CupsetError(Exception):
    """Base class for all package errors."""


class DimensionError(CupsetError, ValueError):
    pass


class NotUnitaryError(CupsetError, ValueError):
    pass


class UnsupportedDimensionError(CupsetError, ValueError):
    pass


class EmptyDataError(CupsetError, ValueError):
    pass


class FitError(CupsetError, RuntimeError):
    """Decay fit failed; the raw data is attached for inspection."""

    def __init__(self, message, xs=None, ys=None):
        super().__init__(message)
        self.xs = None if xs is None else list(xs)
        self.ys = None if ys is None else list(ys)
