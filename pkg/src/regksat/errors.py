"""Exception types raised across the package."""


class RegKSatError(Exception):
    """Base class for all package errors."""


class NonRealizable(RegKSatError, ValueError):
    """A finite instance shape violates an integrality or sign constraint."""


class BracketFailure(RegKSatError):
    pass


class NoConvergence(RegKSatError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DegenerateF(RegKSatError, ValueError):
    pass


class NonPositiveVariance(RegKSatError):
    """The normalized overlap variance is not positive: the center is not a local max."""

    def __init__(self, value):
        super().__init__(f"normalized variance is not positive: {value!r}")
        self.value = value


class SingularSigma(RegKSatError):
    pass


class Inconclusive(RegKSatError):
    """A dominance margin fell inside the numerical tolerance band."""

    def __init__(self, message, scan=None, r=None):
        super().__init__(message)
        self.scan = scan
        self.r = r


class TooLarge(RegKSatError, ValueError):
    pass
