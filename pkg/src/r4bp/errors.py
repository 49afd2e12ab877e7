"""Exception hierarchy shared by all r4bp modules."""


class R4BPError(Exception):
    """Base class for every error raised by this package."""


class InvalidSystemError(R4BPError, ValueError):
    """Dimensional constants are non-positive or violate Kepler's third law."""


class DomainError(R4BPError, ValueError):
    """A parameter lies outside its admissible range."""


class DegenerateCaseError(DomainError):
    """The requested computation is ill-posed for this parameter value."""


class SingularityError(R4BPError, ArithmeticError):
    """Evaluation at (or within the guard radius of) a singular point.

    ``index`` is the primary index (1, 2, 3) for collision singularities and
    ``None`` for the artificial singularities of the regularized chart.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PoleError(SingularityError):
    """The Birkhoff map is evaluated at its pole w = 0."""


class ZeroDerivativeError(SingularityError):
    """The Birkhoff derivative vanishes, so momenta cannot be mapped back."""


class BranchError(R4BPError, ValueError):
    """Unknown pre-image branch label."""


class IntegrationError(R4BPError, RuntimeError):
    """Integration aborted; the partial trajectory is kept on ``trajectory``."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConvergenceError(R4BPError, RuntimeError):
    """Newton iteration failed to reach the requested residual."""


class NoCrossingError(ConvergenceError):
    """The trajectory never reached the requested x-axis crossing."""


class CollisionError(R4BPError, RuntimeError):
    """A shooting trajectory ran into an unregularized primary."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index
