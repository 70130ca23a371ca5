"""Numerical differential geometry of strictly pseudoconvex domains.

Computes Bergman kernels and metrics, Kaehler curvature by two independent
routes, CR-foliation/pseudohermitian invariants of level-set foliations, and
boundary-approach scans verifying that holomorphic sectional curvature tends
to -4/(n+1) at the boundary.
"""

__version__ = "0.1.0"

from .errors import (
    BergmanLabError,
    CacheCorrupt,
    ConfigError,
    DegenerateLeviForm,
    DegeneratePlane,
    DivisionByZeroJet,
    DomainError,
    InsufficientRows,
    NotBergmanPhi,
    NotPositiveDefinite,
    OutsideCollar,
    OutsideDomain,
    QuadratureFailure,
    RootNotBracketed,
    SeriesNotConverged,
    SingularHessian,
    UnclassifiedField,
)

__all__ = [
    "BergmanLabError",
    "CacheCorrupt",
    "ConfigError",
    "DegenerateLeviForm",
    "DegeneratePlane",
    "DivisionByZeroJet",
    "DomainError",
    "InsufficientRows",
    "NotBergmanPhi",
    "NotPositiveDefinite",
    "OutsideCollar",
    "OutsideDomain",
    "QuadratureFailure",
    "RootNotBracketed",
    "SeriesNotConverged",
    "SingularHessian",
    "UnclassifiedField",
    "__version__",
]
