"""Exception and warning classes raised across the package."""


class OpRiskError(Exception):
    """Base class for all package errors."""


class DomainError(OpRiskError, ValueError):
    """An argument lies outside the domain of the function."""


class DegenerateParameterError(OpRiskError, ValueError):
    """Parameters sit on a degenerate boundary the caller did not opt into."""


class NoSolutionError(OpRiskError, ValueError):
    """A calibration problem has no solution for the given inputs."""

    def __init__(self, message, attainable=None):
        super().__init__(message)
        self.attainable = attainable


class EmptyDataError(OpRiskError, ValueError):
    """An operation that needs data received none."""


class SingularJacobianError(OpRiskError, ArithmeticError):
    """A change of variables has a (numerically) vanishing Jacobian."""


class TotalConflictError(OpRiskError, ValueError):
    """Two Dempster-Shafer structures share no compatible focal elements."""


class InconsistentEvidenceError(OpRiskError, ValueError):
    """Aggregated bounds cross: lower bound exceeds upper bound."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class MixedEvidenceError(OpRiskError, ValueError):
    """Statistical (confidence) bounds combined with sure bounds without consent."""


class NonIdentifiableWarning(UserWarning):
    """Hyperparameters are not identified by the supplied data."""


class BoundaryEstimateWarning(UserWarning):
    """The optimum lies on (or runs off to) the boundary of the parameter space."""
