"""Exception types raised across the package."""


class LiouvillianError(Exception):
    """Base class for all package errors."""


class NotAPole(LiouvillianError, ValueError):
    pass


class InconsistentFactorization(LiouvillianError, ValueError):
    pass


class OddHighOrder(LiouvillianError):
    """A location has a pole order that Case 1 of Kovacic's algorithm cannot handle."""


class SingularSystem(LiouvillianError):
    pass


class RepeatedRootOutsideCase2(LiouvillianError):
    """Coincident K1 roots where the real/distinct hypotheses say they cannot coincide."""


class PochhammerPole(LiouvillianError, ZeroDivisionError):
    pass


class ConditionNotMet(LiouvillianError):
    pass


class NonConvergence(LiouvillianError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class HypothesisViolated(LiouvillianError, ValueError):
    pass


class DivisionNearZero(LiouvillianError, ZeroDivisionError):
    pass
