"""Expected warranty expense for nested rectangular coverage regions.

Region ``k`` covers a first failure inside ``[0, t_k] x [0, u_k]`` but not
inside region ``k - 1``.  It is charged ``base_cost * cost_k`` times the
corner difference ``G(t_k, u_k) - G(t_{k-1}, u_{k-1})``, where ``G`` is the
joint CDF of the waiting region out of the working state.  Only the first
failure is covered.

Note the corner difference is not the probability mass of the L-shaped
set difference of the two rectangles; that would need the full
rectangle-measure formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    NegativeCostError,
    NegativeIncrementError,
    NonPositiveLimitError,
    NotNestedError,
    ValidationError,
)
from .inversion import InversionConfig
from .waiting import WaitingDistribution, waiting_cdf_at

INCREMENT_TOL = 1e-6


@dataclass(frozen=True)
class CoverageRegion:
    t_limit: float
    u_limit: float
    cost: float


@dataclass(frozen=True)
class WarrantyPolicy:
    """Nested coverage regions; region costs are multiples of ``base_cost``."""

    from_state: int
    base_cost: float
    regions: tuple[CoverageRegion, ...]


@dataclass(frozen=True)
class ExpenseReport:
    ewe: float
    probabilities: tuple[float, ...]
    contributions: tuple[float, ...]
    base_cost: float = 1.0

    @property
    def ewe_in_base_units(self) -> float:
        return self.ewe / self.base_cost


def validate_policy(regions, from_state: int = 1, base_cost: float = 1.0) -> WarrantyPolicy:
    """Build a :class:`WarrantyPolicy` from ``(t_limit, u_limit, cost)`` triples.

    Raises
    ------
    NonPositiveLimitError, NegativeCostError, NotNestedError
    """
    if not (isinstance(base_cost, (int, float)) and math.isfinite(base_cost) and base_cost > 0):
        raise ValidationError(f"base cost must be a positive number, got {base_cost!r}")
    if isinstance(from_state, bool) or not isinstance(from_state, int) or from_state < 0:
        raise ValidationError(f"from_state must be a nonnegative integer, got {from_state!r}")
    out = []
    for k, raw in enumerate(regions):
        if isinstance(raw, CoverageRegion):
            t, u, c = raw.t_limit, raw.u_limit, raw.cost
        else:
            try:
                t, u, c = (float(x) for x in raw)
            except (TypeError, ValueError):
                raise ValidationError(f"region {k} must be (t_limit, u_limit, cost), got {raw!r}") from None
        if not all(math.isfinite(x) for x in (t, u, c)):
            raise ValidationError(f"region {k} has non-finite values")
        if t <= 0 or u <= 0:
            raise NonPositiveLimitError(k)
        if c < 0:
            raise NegativeCostError(k)
        if out and not (t > out[-1].t_limit and u > out[-1].u_limit):
            raise NotNestedError(k)
        out.append(CoverageRegion(t, u, c))
    if not out:
        raise ValidationError("a policy needs at least one coverage region")
    return WarrantyPolicy(from_state, float(base_cost), tuple(out))


def expected_warranty_expense(policy: WarrantyPolicy, G: WaitingDistribution,
                              cfg: InversionConfig | None = None) -> ExpenseReport:
    """Sum of region cost times corner-difference probability.

    Raises
    ------
    NegativeIncrementError
        A corner difference is below ``-1e-6``.
    """
    if G.from_state != policy.from_state:
        raise ValidationError(
            f"policy covers failures from state {policy.from_state}, "
            f"but G is the waiting law of state {G.from_state}"
        )
    probs, contribs = [], []
    previous = 0.0
    for k, region in enumerate(policy.regions):
        current = waiting_cdf_at(G, (region.t_limit, region.u_limit), cfg)
        q = current - previous
        if q < -INCREMENT_TOL:
            raise NegativeIncrementError(f"region {k}: CDF decreases by {-q:.3g}")
        probs.append(q)
        contribs.append(policy.base_cost * region.cost * q)
        previous = current
    return ExpenseReport(math.fsum(contribs), tuple(probs), tuple(contribs), policy.base_cost)
