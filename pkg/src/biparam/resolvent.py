"""Transition matrices from the generator.

Three independent routes to ``P(t, u)``:

* ``laplace2d``: numerical inversion of the double transform
  ``(s1 s2 I - A)^-1``;
* ``series``: the power series ``sum_n A^n (t u)^n / (n!)^2``, which solves
  ``P_tu = A P`` with ``P = I`` on both axes;
* ``pde``: the finite-difference Goursat solver in :mod:`biparam.pde`.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .chain import GeneratorMatrix, QueryPoint, TransitionMatrix, as_point
from .errors import (
    EntryInversionError,
    MaxTermsExceededError,
    NonConvergenceError,
    OutOfDomainError,
    SingularResolventError,
    ValidationError,
)
from .inversion import (
    InversionConfig,
    TransformPoint,
    convergence_limit,
    invert_samples,
    sample_grid,
)
from .pde import pde_transition

METHODS = ("series", "laplace2d", "pde")
PIVOT_TOL = 1e-14


def resolvent_at(A: GeneratorMatrix, s) -> np.ndarray:
    """``(s1 s2 I - A)^-1`` by LU with partial pivoting.

    Raises ``SingularResolventError`` when a pivot falls below ``1e-14``
    relative to the matrix norm, i.e. ``s1 s2`` sits on an eigenvalue.
    """
    if not isinstance(s, TransformPoint):
        s = TransformPoint(*s)
    n = A.n
    z = complex(s.s1) * complex(s.s2)
    m = z * np.eye(n) - A.a
    scale = max(np.abs(m).sum(axis=1).max(), 1e-300)
    with warnings.catch_warnings():
        # an exactly zero pivot is reported below as SingularResolventError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    if np.abs(np.diag(lu)).min() < PIVOT_TOL * scale:
        raise SingularResolventError(f"s1*s2 = {z} is (numerically) an eigenvalue of A")
    return scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)


def resolvent_batch(A: GeneratorMatrix, s1, s2) -> np.ndarray:
    """Resolvent at every point of broadcast arrays ``s1``, ``s2``.

    Returns an array of shape ``broadcast(s1, s2).shape + (n, n)``.
    """
    z = np.asarray(s1) * np.asarray(s2)
    n = A.n
    eye = np.eye(n)
    m = z[..., None, None] * eye - A.a
    try:
        return np.linalg.solve(m, np.broadcast_to(eye, m.shape).astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SingularResolventError(str(exc)) from exc


def invert2d_matrix(A: GeneratorMatrix, at, cfg: InversionConfig | None = None) -> TransitionMatrix:
    """``P(t, u)`` by entrywise inversion of the resolvent.

    The resolvent is evaluated once per transform node and all entries
    are inverted together.
    """
    cfg = cfg or InversionConfig()
    at = as_point(at)
    if at.t <= 0 or at.u <= 0:
        raise OutOfDomainError(f"inversion needs t > 0 and u > 0, got ({at.t}, {at.u})")
    s1, s2 = sample_grid(at, cfg)
    values = resolvent_batch(A, s1, s2)
    p, err = invert_samples(values, at, cfg)
    bad = np.argwhere(err > convergence_limit(cfg, p))
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise EntryInversionError(
            i, j, NonConvergenceError(f"Euler sums oscillate by {err[i, j]:.3g}")
        )
    return TransitionMatrix(p, at, "laplace2d", tolerance=10 * cfg.tolerance)


def series_transition(A: GeneratorMatrix, at, max_terms: int = 200,
                      rel_tol: float = 1e-12) -> TransitionMatrix:
    """``P(t, u) = sum_n A^n (t u)^n / (n!)^2``.

    Summation stops once a term's inf-norm is below ``rel_tol`` times the
    running sum's, counted only past the largest term (``n^2 >= ||A|| t u``).

    Raises
    ------
    MaxTermsExceededError
        ``rel_tol`` was not reached within ``max_terms`` terms.
    """
    if max_terms < 1 or int(max_terms) != max_terms:
        raise ValidationError(f"max_terms must be a positive integer, got {max_terms!r}")
    if not rel_tol > 0:
        raise ValidationError(f"rel_tol must be positive, got {rel_tol!r}")
    at = as_point(at)
    a = np.asarray(A.a, dtype=float)
    n = A.n
    x = at.t * at.u
    total = np.eye(n)
    if x == 0.0:
        return TransitionMatrix(total, at, "series", tolerance=0.0)
    peak = A.norm_inf() * x
    term = np.eye(n)
    for k in range(1, int(max_terms) + 1):
        term = term @ a * (x / (k * k))
        total = total + term
        size = np.abs(term).sum(axis=1).max()
        if size == 0.0 or (k * k >= peak and size <= rel_tol * np.abs(total).sum(axis=1).max()):
            tol = max(rel_tol, 1e-15 * math.exp(2 * math.sqrt(peak)))
            return TransitionMatrix(total, at, "series", tolerance=tol)
    raise MaxTermsExceededError(f"series at t*u = {x} did not reach rel_tol {rel_tol} in {max_terms} terms")


def transition(A: GeneratorMatrix, at, method: str = "series", *,
               cfg: InversionConfig | None = None, pde_steps=(200, 200),
               series_terms: int = 200, series_tol: float = 1e-12) -> TransitionMatrix:
    """Dispatch to one of :data:`METHODS`.  Points on an axis give ``I``."""
    at = as_point(at)
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    if at.on_boundary:
        return TransitionMatrix(np.eye(A.n), at, method, tolerance=0.0)
    if method == "series":
        return series_transition(A, at, series_terms, series_tol)
    if method == "laplace2d":
        return invert2d_matrix(A, at, cfg)
    nt, nu = (pde_steps, pde_steps) if isinstance(pde_steps, int) else pde_steps
    return pde_transition(A, at, nt, nu)


def ck_residual(A: GeneratorMatrix, p1, p2, solver: str = "series", **options) -> float:
    """``||P(p1 + p2) - P(p1) P(p2)||_inf`` for the chosen solver.

    A diagnostic only: the Goursat solution is not closed under this
    composition in general, so nonzero values are expected.
    """
    p1, p2 = as_point(p1), as_point(p2)
    total = transition(A, p1 + p2, solver, **options).p
    product = transition(A, p1, solver, **options).p @ transition(A, p2, solver, **options).p
    return float(np.abs(total - product).sum(axis=1).max())
