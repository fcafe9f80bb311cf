"""Finite-difference solver for the Goursat problem ``P_tu = A P`` (or ``P A``).

Data are prescribed on both axes (``P = I`` there).  Each cell is updated
with the trapezoidal rule over the cell::

    P[i+1, j+1] = P[i+1, j] + P[i, j+1] - P[i, j] + h k M(Pbar)

where ``Pbar`` is the mean of the four corners and ``M`` is left (backward
equation) or right (forward equation) multiplication by ``A``.  The corner
value enters ``Pbar`` implicitly; the cell equation is linear in it, so it
is solved exactly with the Cayley factor ``R = (I - c A)^-1 (I + c A)``,
``c = h k / 4``::

    P[i+1, j+1] = R (P[i+1, j] + P[i, j+1]) - P[i, j]        (backward)

Cells on one anti-diagonal are independent and are updated together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import GeneratorMatrix, QueryPoint, TransitionMatrix, as_point
from .errors import BudgetExceededError, OutOfDomainError, StepTooCoarseError, ValidationError

STEP_GUARD = 0.1
# float64 entries held by one grid (~400 MB)
MEMORY_BUDGET = 50_000_000
MAX_STEPS = 100_000
SIDES = ("backward", "forward")


@dataclass(frozen=True, eq=False)
class GoursatGrid:
    T: float
    U: float
    nt: int
    nu: int
    values: np.ndarray
    side: str = "backward"

    @property
    def h(self) -> float:
        return self.T / self.nt

    @property
    def k(self) -> float:
        return self.U / self.nu


def _cayley(a: np.ndarray, c: float) -> np.ndarray:
    eye = np.eye(a.shape[0])
    return np.linalg.solve(eye - c * a, eye + c * a)


def solve_goursat(A: GeneratorMatrix, T: float, U: float, nt: int, nu: int,
                  side: str = "backward") -> GoursatGrid:
    """March the trapezoidal Goursat scheme over ``[0, T] x [0, U]``.

    Raises
    ------
    StepTooCoarseError
        ``h * k * ||A||_inf > 0.1``.
    BudgetExceededError
        The grid would hold more than ``MEMORY_BUDGET`` floats.
    """
    if side not in SIDES:
        raise ValidationError(f"side must be one of {SIDES}, got {side!r}")
    if not (T > 0 and U > 0 and math.isfinite(T) and math.isfinite(U)):
        raise ValidationError(f"grid horizons must be positive, got T={T!r}, U={U!r}")
    for name, steps in (("nt", nt), ("nu", nu)):
        if int(steps) != steps or not 2 <= steps <= MAX_STEPS:
            raise ValidationError(f"{name} must be an integer in [2, {MAX_STEPS}], got {steps!r}")
    nt, nu = int(nt), int(nu)
    n = A.n
    if (nt + 1) * (nu + 1) * n * n > MEMORY_BUDGET:
        raise BudgetExceededError(
            f"grid of {nt + 1}x{nu + 1} cells with {n}x{n} matrices exceeds {MEMORY_BUDGET} floats"
        )
    h, k = T / nt, U / nu
    coarseness = h * k * A.norm_inf()
    if coarseness > STEP_GUARD:
        raise StepTooCoarseError(f"h*k*||A|| = {coarseness:.3g} exceeds {STEP_GUARD}")

    a = np.asarray(A.a, dtype=float)
    R = _cayley(a, h * k / 4.0)
    P = np.empty((nt + 1, nu + 1, n, n))
    P[0, :] = np.eye(n)
    P[:, 0] = np.eye(n)
    for d in range(2, nt + nu + 1):
        i = np.arange(max(1, d - nu), min(nt, d - 1) + 1)
        j = d - i
        s = P[i, j - 1] + P[i - 1, j]
        if side == "backward":
            P[i, j] = R @ s - P[i - 1, j - 1]
        else:
            P[i, j] = s @ R - P[i - 1, j - 1]
    P.setflags(write=False)
    return GoursatGrid(float(T), float(U), nt, nu, P, side)


def _locate(x: float, step: float, count: int):
    pos = x / step
    near = round(pos)
    if abs(pos - near) < 1e-9:
        pos = float(near)
    i = min(int(math.floor(pos)), count - 1)
    return i, pos - i


def grid_lookup(g: GoursatGrid, at) -> TransitionMatrix:
    """Bilinear interpolation of a solved grid at ``at``."""
    at = as_point(at)
    slack = 1e-12
    if at.t > g.T * (1 + slack) or at.u > g.U * (1 + slack):
        raise OutOfDomainError(f"({at.t}, {at.u}) lies outside [0, {g.T}] x [0, {g.U}]")
    i, a = _locate(min(at.t, g.T), g.h, g.nt)
    j, b = _locate(min(at.u, g.U), g.k, g.nu)
    v = g.values
    if a == 0.0 and b == 0.0:
        p = v[i, j]
    else:
        p = ((1 - a) * (1 - b) * v[i, j] + a * (1 - b) * v[i + 1, j]
             + (1 - a) * b * v[i, j + 1] + a * b * v[i + 1, j + 1])
    return TransitionMatrix(p, at, "pde", tolerance=1e-4)


def _fit_steps(A: GeneratorMatrix, at: QueryPoint, nt: int, nu: int,
               coarseness: float = 0.01) -> tuple[int, int]:
    # scale both counts up until h k ||A|| <= coarseness
    need = at.t * at.u * A.norm_inf() / coarseness
    if nt * nu >= need:
        return nt, nu
    f = math.sqrt(need / (nt * nu))
    return math.ceil(nt * f), math.ceil(nu * f)


def pde_transition(A: GeneratorMatrix, at, steps: int = 200, steps_u: int | None = None,
                   side: str = "backward", refine: bool = True) -> TransitionMatrix:
    """``P(t, u)`` from a grid whose far corner is the query point.

    The grid has ``steps`` cells along ``t`` and ``steps_u`` (default: the
    same) along ``u``; both are scaled up if needed so that
    ``h k ||A|| <= 0.01``.  With ``refine`` the grid is also solved at twice
    the resolution and the corner values are Richardson-extrapolated; a
    third of the difference between the two levels is reported as the
    tolerance.
    """
    at = as_point(at)
    if at.on_boundary:
        return TransitionMatrix(np.eye(A.n), at, "pde", tolerance=0.0)
    nt, nu = _fit_steps(A, at, int(steps), int(steps_u or steps))
    coarse = solve_goursat(A, at.t, at.u, nt, nu, side).values[-1, -1]
    if not refine:
        return TransitionMatrix(coarse, at, "pde", tolerance=1e-4)
    fine = solve_goursat(A, at.t, at.u, 2 * nt, 2 * nu, side).values[-1, -1]
    p = (4.0 * fine - coarse) / 3.0
    tol = max(float(np.abs(fine - coarse).max()) / 3.0, 1e-12)
    return TransitionMatrix(p, at, "pde", tolerance=tol)
