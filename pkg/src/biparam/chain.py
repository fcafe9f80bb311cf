"""Core types for Markov chains indexed by a (time, usage) pair.

A chain is characterised by its infinitesimal transition matrix ``A``
(mixed second derivative of ``P(t, u)`` at the origin).  ``P(t, 0)`` and
``P(0, u)`` are taken to be the identity everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    NegativeOffDiagonalError,
    NonFiniteError,
    NonSquareError,
    NonStochasticInputError,
    OutOfDomainError,
    PositiveDiagonalError,
    RowSumNonZeroError,
    ValidationError,
)

ROW_SUM_TOL = 1e-12
RANGE_EPS = 1e-9
STOCHASTIC_TOL = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Validated infinitesimal transition matrix.

    Use :func:`validate_generator` to build one from raw data.
    """

    a: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def norm_inf(self) -> float:
        return float(np.abs(self.a).sum(axis=1).max()) if self.n else 0.0


@dataclass(frozen=True)
class QueryPoint:
    t: float
    u: float

    def __post_init__(self):
        for name in ("t", "u"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise OutOfDomainError(f"{name} must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "u", float(self.u))

    def __add__(self, other: QueryPoint) -> QueryPoint:
        return QueryPoint(self.t + other.t, self.u + other.u)

    @property
    def on_boundary(self) -> bool:
        return self.t == 0.0 or self.u == 0.0


def as_point(at) -> QueryPoint:
    if isinstance(at, QueryPoint):
        return at
    t, u = at
    return QueryPoint(t, u)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """``P(t, u)`` as produced by one of the solvers.

    ``range_warning`` is derived: it is set exactly when some entry lies
    outside ``[-1e-9, 1 + 1e-9]``.  Entries are never clipped.
    """

    p: np.ndarray
    at: QueryPoint
    method: str
    tolerance: float = 1e-8
    range_warning: bool = field(init=False)

    def __post_init__(self):
        p = _frozen(np.asarray(self.p, dtype=float))
        object.__setattr__(self, "p", p)
        bad = (p < -RANGE_EPS) | (p > 1 + RANGE_EPS)
        object.__setattr__(self, "range_warning", bool(bad.any()))

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def row_sum_error(self) -> float:
        return float(np.abs(self.p.sum(axis=1) - 1.0).max())


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    pi: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        if pi.ndim != 1 or pi.size == 0:
            raise ValidationError("probability vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(pi)):
            raise NonFiniteError("probability vector")
        if np.any(pi < 0):
            raise ValidationError(f"probability vector has negative entries: {pi.tolist()}")
        if abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ValidationError(f"probability vector sums to {pi.sum()!r}, expected 1")
        object.__setattr__(self, "pi", _frozen(pi))

    def __len__(self):
        return self.pi.size


def validate_generator(raw, labels=None) -> GeneratorMatrix:
    """Check that ``raw`` is an infinitesimal transition matrix.

    Off-diagonal entries must be nonnegative, diagonal entries nonpositive
    and every row must sum to zero within ``1e-12``.

    Raises
    ------
    NonSquareError, NonFiniteError, NegativeOffDiagonalError,
    PositiveDiagonalError, RowSumNonZeroError
    """
    try:
        a = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"generator is not a numeric matrix: {exc}") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NonSquareError(a.shape)
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("generator")
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            if i != j and a[i, j] < 0:
                raise NegativeOffDiagonalError(i, j, float(a[i, j]))
        if a[i, i] > 0:
            raise PositiveDiagonalError(i, float(a[i, i]))
    sums = a.sum(axis=1)
    for i in range(n):
        if abs(sums[i]) > ROW_SUM_TOL:
            raise RowSumNonZeroError(i, float(sums[i]))
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise ValidationError(f"expected {n} distinct state labels, got {list(labels)}")
    return GeneratorMatrix(_frozen(a), labels)


def marginal_distribution(pi0, P: TransitionMatrix) -> ProbabilityVector:
    """Distribution of the chain at ``P.at`` given the initial vector ``pi0``.

    The product ``pi0 @ P`` is renormalised when its sum is off by less
    than ``1e-6``; larger deviations mean ``P`` is not stochastic.
    Negative entries beyond ``-1e-9`` are rejected rather than clipped.
    """
    if not isinstance(pi0, ProbabilityVector):
        pi0 = ProbabilityVector(pi0)
    p = np.asarray(P.p if isinstance(P, TransitionMatrix) else P, dtype=float)
    if p.ndim != 2 or p.shape != (len(pi0), len(pi0)):
        raise DimensionMismatchError(
            f"initial vector has length {len(pi0)} but P has shape {p.shape}"
        )
    rows = np.abs(p.sum(axis=1) - 1.0).max()
    if rows >= STOCHASTIC_TOL:
        raise NonStochasticInputError(f"P rows deviate from 1 by {rows:.3g}")
    pi = pi0.pi @ p
    total = pi.sum()
    if abs(total - 1.0) >= STOCHASTIC_TOL:
        raise NonStochasticInputError(f"pi0 @ P sums to {total!r}")
    if pi.min() < -RANGE_EPS:
        raise NonStochasticInputError(
            f"pi0 @ P has a negative entry {pi.min():.3g}; P is outside [0, 1]"
        )
    pi = np.where(pi < 0, 0.0, pi)
    if abs(pi.sum() - 1.0) > ROW_SUM_TOL:
        pi = pi / pi.sum()
    return ProbabilityVector(pi)
