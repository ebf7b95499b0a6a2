"""
FCE Error Types
Typed exceptions raised by the basis, element, constraint, solver and bench layers
"""

from typing import Any, Optional, Sequence


__all__ = [
    'FceError',
    'ConfigurationError',
    'DomainError',
    'ShapeError',
    'DataError',
    'SupportBasisError',
    'ModeError',
    'ConstraintError',
    'NumericError',
    'ConvergenceError',
]


class FceError(Exception):
    """Base class for every error raised by the fce package"""


class ConfigurationError(FceError, ValueError):
    """Invalid orders, intervals, kinds or incompatible settings"""


class DomainError(FceError, ValueError):
    """A point lies outside the interval, mesh or edge segment it is evaluated on"""


class ShapeError(FceError, ValueError):
    """Parameter vector or value array has the wrong length"""


class DataError(FceError, ValueError):
    """Boundary or corner data is inconsistent"""

    def __init__(self, message: str, mismatch: Optional[float] = None):
        super().__init__(message)
        self.mismatch = mismatch


class SupportBasisError(FceError, ValueError):
    """The constraint matrix built from the support functions is singular"""

    def __init__(self, message: str, constraints: Sequence[Any] = ()):
        super().__init__(message)
        self.constraints = tuple(constraints)


class ModeError(FceError, ValueError):
    """Requested enforcement or solve mode is unavailable for this field or system"""


class ConstraintError(FceError, ValueError):
    """Cyclic, conflicting or incompatible relative constraints"""

    def __init__(self, message: str, mismatch: Optional[float] = None):
        super().__init__(message)
        self.mismatch = mismatch


class NumericError(FceError, ArithmeticError):
    """An inner iteration failed to converge"""


class ConvergenceError(FceError, RuntimeError):
    """Gauss-Newton failed; carries the iteration diagnostics"""

    def __init__(self, message: str, diagnostics: Any = None):
        super().__init__(message)
        self.diagnostics = diagnostics
