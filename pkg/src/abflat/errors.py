"""Exception hierarchy shared by every module."""

import numpy as np


class AbflatError(Exception):
    """Base class for all toolkit errors."""


class InputError(AbflatError, ValueError):
    """Malformed arguments: bad index, unknown name, mismatched sizes."""


class DomainError(InputError):
    """A value left the domain of a function or of a metric.

    ``point`` carries the offending argument (value, grid point, or sample)
    so that reports can say *where* things broke.
    """

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at {_fmt_point(point)}"
        super().__init__(message)
        self.point = point


class SingularityError(DomainError, ArithmeticError):
    """Division by zero, or a singular matrix."""


class ContractError(AbflatError):
    """A precondition of an operation could not be certified."""


class QuadratureError(AbflatError, ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""


def _fmt_point(point):
    arr = np.asarray(point)
    if arr.size > 8:
        flat = arr.ravel()
        return "[" + ", ".join(f"{v:.6g}" for v in flat[:8]) + ", ...]"
    if arr.ndim == 0:
        return f"{arr.item():.6g}" if np.isrealobj(arr) else str(arr.item())
    return np.array2string(arr, precision=6)
