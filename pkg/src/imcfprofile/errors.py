"""Exception hierarchy for the profile solver.

Every failure mode a caller is expected to branch on gets its own class.
``SingularDenominator`` in particular is an error and never a NaN: the
denominator w = r f_r - f going nonpositive means the solution left the
regime where the profile equation is solvable, and callers must decide
what that means for them.
"""


class ImcfError(Exception):
    """Base class for all library errors."""


class DomainError(ImcfError):
    """Parameter outside the admissible domain (n >= 2, lambda > 0, mu < 0, ...)."""


class SingularRadius(ImcfError):
    """The radial equation was evaluated at r <= 0."""


class SingularDenominator(ImcfError):
    """w = r f_r - f <= 0 at an evaluation point."""


class OutOfRange(ImcfError):
    """Profile evaluated beyond its sampled radius range."""


class DenominatorCollapse(ImcfError):
    """s h(s) - g(s) <= 0 at a quadrature node of a fixed-point iterate."""


class BallEscape(ImcfError):
    """A fixed-point iterate left the trust ball around the seed state."""


class NoConvergence(ImcfError):
    """Fixed-point iteration failed to converge within its budget."""

    def __init__(self, message, *, eps=None, ratio=None):
        super().__init__(message)
        self.eps = eps
        self.ratio = ratio


class StepUnderflow(ImcfError):
    """Adaptive integrator step shrank below the resolvable scale.

    ``x`` and ``y`` hold the last accepted state when available.
    """

    def __init__(self, message, *, x=None, y=None):
        super().__init__(message)
        self.x = x
        self.y = y


class ZeroHeight(ImcfError):
    """q = r f_r / f requested too close to the zero crossing of f."""


class InsufficientRange(ImcfError):
    """Profile does not extend far enough for the requested analysis."""


class VanishingMeanCurvature(ImcfError):
    """Mean curvature term below threshold in the spacetime residual."""


class SeriesDivergence(ImcfError):
    """Power series evaluated outside its estimated radius of convergence."""
