"""Exception hierarchy shared across the package."""


class HestonVvixError(Exception):
    """Base class for all package errors."""


class DomainError(HestonVvixError, ValueError):
    """An argument lies outside the domain of the operation."""


class IntegrationError(HestonVvixError):
    """The integrand produced a non-finite value."""


class NonConvergence(HestonVvixError):
    """Adaptive quadrature could not meet its tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers may decide to accept them.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NoKStar(HestonVvixError):
    """No strike of the grid lies at or below the forward."""


class NegativeVariance(HestonVvixError):
    """A variance that must be positive came out negative."""


class NoBracket(HestonVvixError):
    """The VVIX target lies outside the range reachable on the sigma bracket."""


class NonMonotone(HestonVvixError):
    """The VVIX is not monotone in sigma on the bracket."""


class PdeInstability(HestonVvixError):
    """The explicit PDE scheme blew up."""
