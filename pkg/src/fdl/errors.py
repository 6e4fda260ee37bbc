"""Exception types raised across the package."""


class FdlError(Exception):
    """Base class for all package errors."""


class AliasingError(FdlError):
    """Grid too small to hold a coefficient window without wrap-around."""


class TailNotDecayed(FdlError):
    """DFT coefficients near the Nyquist edge exceed the requested tolerance."""


class HypothesisViolated(FdlError):
    """A lemma's hypotheses do not hold, so its bound is not applicable."""


class DepthOverflow(FdlError):
    pass


class ExactDyadic(FdlError):
    """The point is a dyadic rational at a checked generation (exponent is infinite)."""

    def __init__(self, x, j):
        super().__init__(f"x = {x!r} is exactly k/2^{j}")
        self.x = x
        self.j = j


class GenerationTooLarge(FdlError):
    pass


class PointOutsideFamily(FdlError):
    pass


class LogBranchError(FdlError):
    """Re f <= 0 somewhere, so the principal logarithm is not continuous."""


class EmptySet(FdlError):
    pass


class DomainError(FdlError):
    pass
