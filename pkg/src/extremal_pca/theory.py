"""Closed-form spiked-model quantities for aspect ratio c = d / k.

Covers the spike map ``phi_c``, the Marčenko–Pastur law ``F_c`` (density,
point mass, CDF by quadrature, quantile by bisection) and the two gap
conditions that decide whether the AIC-type criteria are consistent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy import integrate

from .errors import InputError, NumericError, RegimeError

CDF_TOL = 1e-10
QUANTILE_XTOL = 1e-12


def aspect_ratio(c: float) -> float:
    """Validate ``c``: positive, finite and not equal to one."""
    c = float(c)
    if not (math.isfinite(c) and c > 0):
        raise InputError(f"aspect ratio must be positive and finite, got {c}")
    if c == 1.0:
        raise RegimeError("c = 1 excluded")
    return c


def mp_support(c: float) -> tuple[float, float]:
    c = aspect_ratio(c)
    r = math.sqrt(c)
    return (1 - r) ** 2, (1 + r) ** 2


def phi_c(x: float, c: float) -> float:
    """Spike map ``x (1 + c / (x - 1))``."""
    c = aspect_ratio(c)
    x = float(x)
    if not x > 1:
        raise NumericError("phi_c undefined at or below 1")
    return x * (1 + c / (x - 1))


def distant_spike_check(xi: float, c: float) -> bool:
    c = aspect_ratio(c)
    if xi < 1:
        raise InputError("population spike must be >= 1")
    return xi > 1 + math.sqrt(c)


@dataclass(frozen=True)
class SpikeForecast:
    xi: float
    is_distant: bool
    predicted_empirical: float


def spike_forecast(xi: float, c: float) -> SpikeForecast:
    """Limit of ``d * lambda_hat`` for a population spike ``xi``.

    Distant spikes separate from the bulk at ``phi_c(xi)``; the others stick
    to the right bulk edge ``(1 + sqrt c)^2``.
    """
    distant = distant_spike_check(xi, c)
    value = phi_c(xi, c) if distant else mp_support(c)[1]
    return SpikeForecast(float(xi), distant, value)


def mp_point_mass(c: float) -> float:
    c = aspect_ratio(c)
    return max(0.0, 1 - 1 / c)


def mp_density(x: float, c: float) -> float:
    """Absolutely continuous part of the Marčenko–Pastur law."""
    a, b = mp_support(c)
    if not a < x < b:
        return 0.0
    return math.sqrt((b - x) * (x - a)) / (2 * math.pi * x * c)


def mp_cdf(x: float, c: float) -> float:
    a, b = mp_support(c)
    mass = mp_point_mass(c)
    if x < 0:
        return 0.0
    if x <= a:
        return mass
    if x >= b:
        return 1.0
    # the algebraic weight absorbs the square-root singularities at the edges
    val, _ = integrate.quad(
        lambda t: math.sqrt(b - t) / (2 * math.pi * t * c),
        a, x, weight="alg", wvar=(0.5, 0.0), epsabs=CDF_TOL, epsrel=CDF_TOL, limit=200,
    )
    return min(1.0, mass + val)


def mp_quantile(alpha: float, c: float) -> float:
    """Generalised inverse of ``F_c`` on its continuous range, by bisection."""
    a, b = mp_support(c)
    lo_level = mp_point_mass(c)
    if not lo_level < alpha < 1:
        raise InputError("quantile outside continuous range")
    lo, hi = a, b
    while hi - lo > QUANTILE_XTOL:
        mid = 0.5 * (lo + hi)
        if mp_cdf(mid, c) < alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class GapResult(NamedTuple):
    satisfied: bool
    margin: float


def _require_distant(xi: float, c: float) -> None:
    if not xi > 1 + math.sqrt(c):
        raise NumericError("not a distant spike")


def gap_condition(xi: float, c: float) -> GapResult:
    """``phi - 1 - log(phi) - 2c`` with ``phi = phi_c(xi)``; consistent iff > 0."""
    c = aspect_ratio(c)
    _require_distant(xi, c)
    phi = phi_c(xi, c)
    margin = phi - 1 - math.log(phi) - 2 * c
    return GapResult(margin > 0, margin)


def modified_gap_condition(xi: float, c: float) -> GapResult:
    """Gap condition for c > 1, evaluated on ``phi_c(xi) / c``."""
    c = aspect_ratio(c)
    if c <= 1:
        raise RegimeError("modified gap applies to c > 1 only")
    _require_distant(xi, c)
    r = phi_c(xi, c) / c
    margin = r - 1 - math.log(r) - 2 / c
    return GapResult(margin > 0, margin)


def applicable_gap(xi: float, c: float) -> GapResult:
    """The gap condition that governs AIC consistency at this ``c``."""
    if aspect_ratio(c) < 1:
        return gap_condition(xi, c)
    return modified_gap_condition(xi, c)
