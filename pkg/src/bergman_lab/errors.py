"""Exception hierarchy for the bergman-lab engine."""


class BergmanLabError(Exception):
    """Base class for all engine errors."""


class DivisionByZeroJet(BergmanLabError):
    """Division by a jet whose value is below the configured floor."""


class DomainError(BergmanLabError):
    """Analytic composition applied outside the function's domain (log/pow of a non-positive value)."""


class OutsideDomain(BergmanLabError):
    """Query point is not an interior point of the domain."""


class QuadratureFailure(BergmanLabError):
    """Shadow-region mapping is degenerate; quadrature cannot proceed."""


class CacheCorrupt(BergmanLabError):
    """Monomial-norm cache file is unreadable or inconsistent."""


class SeriesNotConverged(BergmanLabError):
    """Series-kernel tail estimate exceeds the configured tolerance."""

    def __init__(self, message, tail_estimate=None):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class NotPositiveDefinite(BergmanLabError):
    """Metric (or Levi form) is not positive definite at the query point."""


class DegeneratePlane(BergmanLabError):
    """Sectional-curvature plane spanned by a vector below the norm floor."""


class OutsideCollar(BergmanLabError):
    """Point fails the collar predicate (complex Hessian of the defining function not positive definite, or vanishing gradient)."""


class SingularHessian(BergmanLabError):
    """Complex Hessian is numerically singular."""


class DegenerateLeviForm(BergmanLabError):
    """Levi form restricted to the complex tangent space is degenerate."""


class UnclassifiedField(BergmanLabError):
    """Vector field cannot be decomposed into the foliation frame classes."""


class NotBergmanPhi(BergmanLabError):
    """Identity requires a Bergman-derived defining function."""


class RootNotBracketed(BergmanLabError):
    """Level-set location failed to bracket the requested level."""


class InsufficientRows(BergmanLabError):
    """Too few scan rows for the requested extrapolation."""


class ConfigError(BergmanLabError):
    """Invalid or unknown configuration key/value."""
