"""Two-dimensional numerical Laplace inversion.

The double transform is inverted one variable at a time with the Euler
algorithm: the Bromwich integral along ``Re s = A / (2 l x)`` is
discretised by the trapezoidal rule with step ``pi / (l x)`` and the
resulting series, grouped into blocks of ``l`` nodes so that it
alternates, is accelerated by binomial averaging of its last 12 partial
sums.

The inner inversion runs over a complex outer variable, so it sums the
two-sided series.  The outer inversion produces a real original and only
needs ``Re`` of the one-sided series.

Aliasing error per axis is about ``exp(-A) * f((2l + 1) x)``; roundoff is
amplified by ``exp(A / (2l))`` per axis.  With ``l = 2`` (oversampling)
and ``A = (digits + 2) ln 10`` both stay well under ``10**-digits`` for
bounded originals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain import QueryPoint, as_point
from .errors import (
    EvaluationFailureError,
    NonConvergenceError,
    OutOfDomainError,
    ValidationError,
)

AVERAGING_TERMS = 11
ORDERS = ("s2_first", "s1_first")


@dataclass(frozen=True)
class TransformPoint:
    s1: complex
    s2: complex


@dataclass(frozen=True)
class InversionConfig:
    """Parameters of the iterated Euler inversion.

    ``euler_terms`` is the index of the last series term used; the last
    11 of those feed the binomial averaging, so the default 35 means 25
    partial sums of plain truncation plus 11 averaging terms.
    """

    euler_terms: int = 35
    target_digits: int = 8
    order: str = "s2_first"
    oversampling: int = 2

    def __post_init__(self):
        if int(self.euler_terms) != self.euler_terms or self.euler_terms < 12:
            raise ValidationError(f"euler_terms must be an integer >= 12, got {self.euler_terms!r}")
        if int(self.target_digits) != self.target_digits or not 4 <= self.target_digits <= 12:
            raise ValidationError(
                f"target_digits must be an integer in [4, 12], got {self.target_digits!r}"
            )
        if int(self.oversampling) != self.oversampling or not 1 <= self.oversampling <= 8:
            raise ValidationError(f"oversampling must be an integer in [1, 8], got {self.oversampling!r}")
        if self.order not in ORDERS:
            raise ValidationError(f"order must be one of {ORDERS}, got {self.order!r}")

    @property
    def shift(self) -> float:
        return (self.target_digits + 2) * math.log(10.0)

    @property
    def tolerance(self) -> float:
        return 10.0 ** -self.target_digits


@lru_cache(maxsize=32)
def euler_weights(n: int, m: int = AVERAGING_TERMS) -> np.ndarray:
    """Weights ``w`` with ``sum(w * a)`` = binomial mean of partial sums ``S_n..S_{n+m}``."""
    w = np.zeros(n + m + 1)
    for j in range(m + 1):
        w[: n + j + 1] += math.comb(m, j) / 2.0**m
    w.setflags(write=False)
    return w


def _nodes(x: float, cfg: InversionConfig) -> np.ndarray:
    l = cfg.oversampling
    m = np.arange(l * (cfg.euler_terms + 1))
    return cfg.shift / (2.0 * l * x) + 1j * np.pi * m / (l * x)


def _phases(cfg: InversionConfig) -> np.ndarray:
    l = cfg.oversampling
    m = np.arange(l * (cfg.euler_terms + 1))
    return np.exp(1j * np.pi * m / l)


def _axes(at: QueryPoint, cfg: InversionConfig):
    if cfg.order == "s2_first":
        return at.t, at.u
    return at.u, at.t


def sample_grid(at: QueryPoint, cfg: InversionConfig):
    """Transform-domain points needed to invert at ``at``.

    Returns ``(s1, s2)`` complex arrays of shape ``(M, 2M - 1)`` with
    ``M = oversampling * (euler_terms + 1)``.  Axis 0 runs over the outer
    variable (node index ``0..M-1``), axis 1 over the inner one (indices
    ``0..M-1`` followed by their conjugates ``-1..-(M-1)``).
    """
    outer_x, inner_x = _axes(at, cfg)
    outer = _nodes(outer_x, cfg)
    half = _nodes(inner_x, cfg)
    inner = np.concatenate([half, np.conj(half[1:])])
    so, si = np.meshgrid(outer, inner, indexing="ij")
    if cfg.order == "s2_first":
        return so, si
    return si, so


def _group(terms: np.ndarray, l: int) -> np.ndarray:
    # consecutive blocks of l nodes form one alternating Euler term
    return terms.reshape(-1, l, *terms.shape[1:]).sum(axis=1)


def invert_samples(values: np.ndarray, at: QueryPoint, cfg: InversionConfig):
    """Invert transform samples taken on :func:`sample_grid`.

    ``values`` has shape ``(M, 2M - 1, *rest)``.  Returns the original at
    ``at`` (shape ``rest``) and an error estimate from the change of the
    outer Euler sum when one fewer term is used.
    """
    N, l = cfg.euler_terms, cfg.oversampling
    n = N - AVERAGING_TERMS
    M = l * (N + 1)
    outer_x, inner_x = _axes(at, cfg)
    phase = _phases(cfg)
    w = euler_weights(n)
    extra = (1,) * (values.ndim - 2)
    damp = math.exp(cfg.shift / (2 * l))

    # inner: two-sided sum, node m paired with node -m
    paired = values[:, :M] * phase.reshape(1, -1, *extra)
    paired[:, 1:] += values[:, M:] * np.conj(phase[1:]).reshape(1, -1, *extra)
    paired = np.moveaxis(paired, 1, 0)
    inner = damp / (2 * l * inner_x) * np.tensordot(w, _group(paired, l), axes=1)

    # outer: real original, one-sided sum
    terms = (inner * phase.reshape(-1, *extra)).real
    terms[0] *= 0.5
    grouped = _group(terms, l)
    scale = damp / (l * outer_x)
    value = scale * np.tensordot(w, grouped, axes=1)
    coarser = scale * np.tensordot(euler_weights(n - 1), grouped[:N], axes=1)
    return value, np.abs(value - coarser)


def _evaluate(k, s1, s2, vectorized: bool) -> np.ndarray:
    try:
        if vectorized:
            out = np.asarray(k(s1, s2), dtype=complex)
            if out.shape[: s1.ndim] != s1.shape:
                out = np.broadcast_to(out, s1.shape)
        else:
            out = np.array(
                [complex(k(TransformPoint(a, b))) for a, b in zip(s1.ravel(), s2.ravel())]
            ).reshape(s1.shape)
    except Exception as exc:  # the evaluator is user code
        raise EvaluationFailureError(f"transform evaluator raised {exc!r}") from exc
    if not np.all(np.isfinite(out)):
        raise EvaluationFailureError("transform evaluator returned non-finite values")
    return out


def convergence_limit(cfg: InversionConfig, magnitude) -> np.ndarray:
    return 10.0 ** (-cfg.target_digits / 2) * np.maximum(1.0, np.abs(magnitude))


def invert2d_scalar(k, at, cfg: InversionConfig | None = None, vectorized: bool = True) -> float:
    """Invert a scalar double Laplace transform at ``(t, u)``.

    Parameters
    ----------
    k : callable
        With ``vectorized=True``, ``k(s1, s2)`` receives broadcastable
        complex arrays and returns an array of the same shape.  Otherwise
        ``k`` is called once per :class:`TransformPoint`.
    at : QueryPoint or (t, u)
        Both coordinates must be strictly positive.
    cfg : InversionConfig, optional

    Raises
    ------
    EvaluationFailureError
        The evaluator raised or produced non-finite values.
    NonConvergenceError
        The Euler sum still moves by more than ``10**(-digits/2)`` between
        the last two truncation levels.
    """
    cfg = cfg or InversionConfig()
    at = as_point(at)
    if at.t <= 0 or at.u <= 0:
        raise OutOfDomainError(f"inversion needs t > 0 and u > 0, got ({at.t}, {at.u})")
    s1, s2 = sample_grid(at, cfg)
    values = _evaluate(k, s1, s2, vectorized)
    value, err = invert_samples(values, at, cfg)
    if err > convergence_limit(cfg, value):
        raise NonConvergenceError(
            f"Euler sums at ({at.t}, {at.u}) oscillate by {float(err):.3g}"
        )
    return float(value)
