"""Markov chains with a continuous two-dimensional (time, usage) parameter.

Transition matrices are computed three independent ways (double Laplace
inversion of the resolvent, the Goursat power series and a finite-difference
PDE solver); waiting-region laws and a two-dimensional warranty expense are
built on top.
"""

from .chain import (
    GeneratorMatrix,
    ProbabilityVector,
    QueryPoint,
    TransitionMatrix,
    marginal_distribution,
    validate_generator,
)
from .inversion import InversionConfig, TransformPoint, invert2d_scalar
from .pde import GoursatGrid, grid_lookup, pde_transition, solve_goursat
from .resolvent import (
    ck_residual,
    invert2d_matrix,
    resolvent_at,
    series_transition,
    transition,
)
from .waiting import (
    WaitingDistribution,
    WaitingRegionRates,
    extract_waiting_transforms,
    factorization_residual,
    survival,
    waiting_cdf_at,
)
from .warranty import (
    CoverageRegion,
    ExpenseReport,
    WarrantyPolicy,
    expected_warranty_expense,
    validate_policy,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageRegion",
    "ExpenseReport",
    "GeneratorMatrix",
    "GoursatGrid",
    "InversionConfig",
    "ProbabilityVector",
    "QueryPoint",
    "TransformPoint",
    "TransitionMatrix",
    "WaitingDistribution",
    "WaitingRegionRates",
    "WarrantyPolicy",
    "ck_residual",
    "expected_warranty_expense",
    "extract_waiting_transforms",
    "factorization_residual",
    "grid_lookup",
    "invert2d_matrix",
    "invert2d_scalar",
    "marginal_distribution",
    "pde_transition",
    "resolvent_at",
    "series_transition",
    "solve_goursat",
    "survival",
    "transition",
    "validate_generator",
    "validate_policy",
    "waiting_cdf_at",
]
