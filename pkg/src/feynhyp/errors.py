"""Exception types shared across the package."""


class FeynhypError(Exception):
    """Base class for all feynhyp errors."""


class PoleError(FeynhypError):
    """A gamma-function argument (or lower series parameter) sits on or too
    close to a non-positive integer, where the value is undefined."""


class DomainError(FeynhypError):
    """The requested point lies outside the real-valued domain of the
    operation (argument out of range, non-real intermediate, etc.)."""


class QuadFailure(FeynhypError):
    """Quadrature refinement reached its level cap without two successive
    levels agreeing to the requested tolerance."""


class NonConvergence(FeynhypError):
    """A series reached the term cap before the stopping rule fired.

    Carries the partial result when available (``result`` attribute).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NoBracket(FeynhypError):
    """Argument pinning failed to bracket a sign change on the search
    interval."""


class UnknownIdentity(FeynhypError):
    """No identity with the requested key exists in the registry."""
