"""Exception hierarchy shared by all modules."""


class PosMapsError(Exception):
    """Base class for every error raised by this package."""


class NotPositiveDefinite(PosMapsError):
    pass


class EmptyInput(PosMapsError):
    pass


class ZeroMatrix(PosMapsError):
    pass


class SlaterViolation(PosMapsError):
    pass


class NotInterior(PosMapsError):
    pass


class NotPositive(PosMapsError):
    pass


class BoundaryMap(PosMapsError):
    """Raised by the exact pipeline for positive maps on the boundary of the cone."""


class NoConvergence(PosMapsError):
    """The fixed-point iteration exhausted its budget.

    Attributes:
        iterations: number of iterations performed.
        best_residual: smallest fixed-point residual seen.
    """

    def __init__(self, iterations, best_residual, message=None):
        self.iterations = iterations
        self.best_residual = best_residual
        super().__init__(
            message
            or f"no convergence after {iterations} iterations "
            f"(best residual {best_residual:.3e})"
        )


class NotRotation(PosMapsError):
    pass


class NotBistochastic(PosMapsError):
    pass


class NormExceeded(PosMapsError):
    pass


class RankDeficientInput(PosMapsError):
    pass


class QZero(PosMapsError):
    pass


class NotAutomorphism(PosMapsError):
    pass


class ExtractionFailure(PosMapsError):
    pass


class InvalidState(PosMapsError):
    pass


class PerturbationFailure(PosMapsError):
    """The line search could not verify a perturbation above the abort threshold."""
