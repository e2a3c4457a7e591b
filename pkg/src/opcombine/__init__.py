"""
Combining internal loss data, external data and expert opinion for
operational risk, and computing capital with the loss distribution
approach.
"""

from .distributions import (
    BetaParams,
    GammaParams,
    GIGParams,
    LognormalParams,
    NegBinParams,
    NormalParams,
    PointMass,
    PoissonParams,
    bessel_k,
    gig_mean,
    gig_mode,
    make_rng,
)
from .errors import (
    BoundaryEstimateWarning,
    DegenerateParameterError,
    DomainError,
    EmptyDataError,
    InconsistentEvidenceError,
    MixedEvidenceError,
    NoSolutionError,
    NonIdentifiableWarning,
    OpRiskError,
    SingularJacobianError,
    TotalConflictError,
)

__all__ = [
    "BetaParams",
    "GammaParams",
    "GIGParams",
    "LognormalParams",
    "NegBinParams",
    "NormalParams",
    "PointMass",
    "PoissonParams",
    "bessel_k",
    "gig_mean",
    "gig_mode",
    "make_rng",
    "BoundaryEstimateWarning",
    "DegenerateParameterError",
    "DomainError",
    "EmptyDataError",
    "InconsistentEvidenceError",
    "MixedEvidenceError",
    "NoSolutionError",
    "NonIdentifiableWarning",
    "OpRiskError",
    "SingularJacobianError",
    "TotalConflictError",
]

__version__ = "0.1.0"
