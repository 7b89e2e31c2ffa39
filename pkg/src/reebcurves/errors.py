"""Exception types raised across the package."""


class DomainError(ValueError):
    """A point or parameter lies outside the domain where it can be evaluated."""


class DegenerateMetricError(ValueError):
    """The metric matrix is singular or not positive definite."""


class DerivativeOrderError(ValueError):
    """A curve cannot supply the requested derivative order."""


class RegularityError(ValueError):
    """A curve has (numerically) vanishing speed."""


class PreconditionError(ValueError):
    """An argument violates a documented precondition."""


class StepSizeError(RuntimeError):
    """Integrator frame drift exceeded its bound; retry with a smaller step."""


class GeodesicPointError(ValueError):
    """The Frenet frame does not exist because the curve is geodesic at this point."""
