"""Exception hierarchy shared by every module."""


class RbsmcError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(RbsmcError, ValueError):
    pass


class SingularMatrix(RbsmcError, ArithmeticError):
    pass


class NoConvergence(RbsmcError, ArithmeticError):
    pass


class NotHermitian(RbsmcError, ValueError):
    pass


class EmptyBasis(RbsmcError, ValueError):
    pass


class SingularActuation(SingularMatrix):
    """``C B_P`` is not invertible, so the deformed system has no equivalent control."""


class UnsupportedDeformation(RbsmcError, ValueError):
    pass


class KStrongViolated(RbsmcError, ValueError):
    pass


class PhiTooSmall(RbsmcError, ValueError):
    pass


class RhoTooLarge(RbsmcError, ValueError):
    pass


class Infeasible(RbsmcError):
    pass


class NumericalFailure(RbsmcError, ArithmeticError):
    pass


class HistoryLengthMismatch(RbsmcError, ValueError):
    pass


class HistoryTooShort(HistoryLengthMismatch):
    pass


class DisturbanceTooLarge(RbsmcError, ValueError):
    pass


class NonpositivePhi(RbsmcError, ValueError):
    pass


class ModeMismatch(RbsmcError, ValueError):
    pass


class ConfigError(RbsmcError, ValueError):
    pass


class DesignStepError(RbsmcError):
    """A step of the sequential design procedure failed.

    ``step`` is the 1-based step index (1..6) and ``state`` the partially
    filled :class:`~rbsmc.smc.DesignState` at the point of failure.
    """

    def __init__(self, step, message, state=None):
        super().__init__(f"design step {step} failed: {message}")
        self.step = step
        self.state = state
