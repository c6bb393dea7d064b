"""Exception hierarchy shared by every steinlab module."""

from __future__ import annotations


class SteinLabError(Exception):
    """Base class for all steinlab errors."""


class InvalidParameter(SteinLabError, ValueError):
    pass


class DomainOverflow(SteinLabError, OverflowError):
    """Argument outside the range where a quantity is representable."""


class NotConverged(SteinLabError):
    """Adaptive quadrature exhausted its subdivision budget.

    The best available estimate is attached as ``result`` so callers can
    still report it.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class KinkError(SteinLabError, ValueError):
    """Two-sided evaluation requested at a jump of a derivative."""


class MomentMismatch(SteinLabError, ValueError):
    pass


class SupportTooLarge(SteinLabError, ValueError):
    pass
