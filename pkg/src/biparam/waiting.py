"""Waiting regions: the (time, usage) vector until the chain leaves a state.

Two characterisations live here side by side:

* the product-exponential survival law ``exp(-l1 t - l2 u)`` with
  user-supplied rates, which is the only law satisfying the survival
  factorisation ``S(s + t, w + u) = S(t, u) S(s, w)``;
* for two-state chains, the density transforms recovered from the
  renewal equations ``p01** = f** p11**`` and ``p10** = g** p00**``.

The second family depends on ``s1 s2`` only, so its originals are
functions of ``t u``; the two are not the same law in general.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chain import GeneratorMatrix, as_point
from .errors import (
    OutOfRangeError,
    SingularRatioError,
    UnsupportedStateCountError,
    ValidationError,
)
from .inversion import InversionConfig, invert2d_scalar
from .resolvent import resolvent_batch

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-6


@dataclass(frozen=True)
class WaitingRegionRates:
    state: int
    rate_time: float
    rate_usage: float

    def __post_init__(self):
        for name in ("rate_time", "rate_usage"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def absorbing(self) -> bool:
        return self.rate_time == 0 and self.rate_usage == 0


def survival(r: WaitingRegionRates, at) -> float:
    """``P(tau > t, gamma > u) = exp(-l1 t - l2 u)``."""
    at = as_point(at)
    return math.exp(-r.rate_time * at.t - r.rate_usage * at.u)


def factorization_residual(r, p1, p2) -> float:
    """``|S(p1 + p2) - S(p1) S(p2)|``.

    ``r`` is either :class:`WaitingRegionRates` or any survival function
    ``(t, u) -> probability``.
    """
    p1, p2 = as_point(p1), as_point(p2)
    if isinstance(r, WaitingRegionRates):
        def S(p):
            return survival(r, p)
    else:
        def S(p):
            return r(p.t, p.u)
    return abs(S(p1 + p2) - S(p1) * S(p2))


@dataclass(frozen=True)
class WaitingDistribution:
    """Transform-domain law of the waiting region out of ``from_state``.

    Both transforms take broadcastable complex arrays ``(s1, s2)``.
    """

    from_state: int
    density_transform: Callable
    cdf_transform: Callable

    def total_mass(self, eps: float = 1e-6) -> float:
        return float(np.real(self.density_transform(np.array(eps), np.array(eps))))


def _ratio(A: GeneratorMatrix, num: tuple[int, int], den: tuple[int, int]):
    def density(s1, s2):
        r = resolvent_batch(A, s1, s2)
        d = r[(..., *den)]
        if np.any(np.abs(d) < 1e-300 + 1e-14 * np.abs(r).max()):
            raise SingularRatioError(f"resolvent entry {den} vanishes")
        return r[(..., *num)] / d

    return density


def extract_waiting_transforms(A: GeneratorMatrix):
    """Density and CDF transforms of the waiting regions of a 2-state chain.

    Returns ``(F, G)`` for states 0 and 1 with ``f** = p01** / p11**`` and
    ``g** = p10** / p00**``; the CDF transforms divide by ``s1 s2``.
    """
    if A.n != 2:
        raise UnsupportedStateCountError(
            f"waiting-region extraction needs a 2-state chain, got {A.n} states"
        )
    out = []
    for state, num, den in ((0, (0, 1), (1, 1)), (1, (1, 0), (0, 0))):
        density = _ratio(A, num, den)

        def cdf(s1, s2, density=density):
            return density(s1, s2) / (np.asarray(s1) * np.asarray(s2))

        out.append(WaitingDistribution(state, density, cdf))
    return tuple(out)


def waiting_cdf_at(w: WaitingDistribution, at, cfg: InversionConfig | None = None) -> float:
    """Joint CDF ``P(tau <= t, gamma <= u)`` by numerical inversion.

    Inversion noise in ``(-1e-6, 0)`` is clamped to 0 and logged; anything
    further outside ``[0, 1]`` raises ``OutOfRangeError``.
    """
    at = as_point(at)
    value = invert2d_scalar(w.cdf_transform, at, cfg)
    if value < -CLAMP_TOL or value > 1 + CLAMP_TOL:
        raise OutOfRangeError(
            f"CDF of state {w.from_state} at ({at.t}, {at.u}) is {value!r}, outside [0, 1]"
        )
    if value < 0:
        log.info("clamped CDF %.3g at (%g, %g) to 0", value, at.t, at.u)
        value = 0.0
    return value

