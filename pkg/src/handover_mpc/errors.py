"""Exception types raised across the package."""


class HandoverError(Exception):
    """Base class for all package errors."""


class AngleNearPi(HandoverError):
    """Rotation logarithm requested too close to the pi branch cut."""


class GimbalLock(HandoverError):
    """RPY extraction at |cos(pitch)| below threshold."""


class DimensionMismatch(HandoverError):
    pass


class DegenerateSegment(HandoverError):
    """Consecutive path via-points coincide."""


class OutOfRange(HandoverError):
    pass


class NotPSD(HandoverError):
    """Matrix expected to be symmetric positive semidefinite is not."""


class NotPositiveDefinite(HandoverError):
    """Kernel matrix factorization failed."""


class InvertedBounds(HandoverError):
    """Upper bound target fell below the lower bound target."""


class InfeasibleBounds(HandoverError):
    """QP box constraints inconsistent before solving."""


class BadWarmStart(HandoverError):
    """Warm-start trajectory contains non-finite values."""


class MaxIterations(HandoverError):
    """Solver hit its iteration cap; best iterate attached."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class Infeasible(HandoverError):
    """QP detected as infeasible."""


class Timeout(HandoverError):
    """Closed-loop run hit the time cap before the grasp condition."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class ParseError(HandoverError):
    """Scenario/config file could not be parsed."""


class ValidationError(HandoverError):
    """A loaded value violates a documented invariant."""


class IoError(HandoverError):
    pass
