"""AIC/BIC-type criteria for the number of spiked eigenvalues.

All six criteria share a Gaussian profile log-likelihood of a spiked model
in which the first ``p`` eigenvalues are free and the remaining ``m - p``
are pooled into their mean::

    L(p) = sum_{i<=p} log l_i + (m - p) log mean(l_{p+1..m})
           + m log((N - 1) / N) + m (log 2pi + 1)

For the fixed-dimensional and ``d < k`` criteria ``m = d - 1`` and ``N = k``;
for ``d > k`` the roles swap, ``m = k - 1`` and ``N = d``.  The criteria then
differ only in scaling and penalty:

=========  ====================================
AicFixed   k L + (p+1)(2d - p)
BicFixed   k L + log(k) (p+1)(d - p/2)
AicCirc    L + (p+1)(2d - p) / k
BicCirc    L + log(k) (p+1)(d - p/2) / k
AicStar    L + (p+1)(2k - p) / d
BicStar    L + log(d) (p+1)(k - p/2) / d
=========  ====================================

The smallest eigenvalue (fixed/circ) or everything past ``l_{k-1}`` (star)
never enters.  Because ``L`` only shifts by a constant when the spectrum is
rescaled, the argmin is scale invariant and raw eigenvalues are used as is.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InputError, NumericError, RegimeError
from .spectrum import Spectrum

LOG_2PI_PLUS_1 = math.log(2 * math.pi) + 1.0


class CriterionKind(str, Enum):
    AicFixed = "aic"
    BicFixed = "bic"
    AicCirc = "aic-circ"
    BicCirc = "bic-circ"
    AicStar = "aic-star"
    BicStar = "bic-star"

    @property
    def is_star(self) -> bool:
        return self in (CriterionKind.AicStar, CriterionKind.BicStar)

    @property
    def is_bic(self) -> bool:
        return self in (CriterionKind.BicFixed, CriterionKind.BicCirc, CriterionKind.BicStar)

    @property
    def family(self) -> str:
        return "bic" if self.is_bic else "aic"


def _eigs(spec) -> np.ndarray:
    if isinstance(spec, Spectrum):
        return spec.eigenvalues
    return np.asarray(spec, dtype=float)


def check_regime(kind: CriterionKind, d: int, k: int) -> None:
    if kind.is_star and not d > k:
        raise RegimeError(f"criterion regime mismatch: {kind.value} needs d > k (d={d}, k={k})")
    if not kind.is_star and not k > d:
        raise RegimeError(f"criterion regime mismatch: {kind.value} needs k > d (d={d}, k={k})")


def max_p(kind: CriterionKind, d: int, k: int) -> int:
    """Largest admissible candidate dimension for ``kind``."""
    return k - 2 if kind.is_star else d - 2


def default_q(kind: CriterionKind, d: int, k: int) -> int:
    """d - 2 when k > d; min(k - 2, ceil(d / 2)) when d > k."""
    if kind.is_star:
        return min(k - 2, math.ceil(d / 2))
    return d - 2


def criterion_values(spec, k: int, kind: CriterionKind, q: Optional[int] = None) -> np.ndarray:
    """Values of criterion ``kind`` for ``p = 1..q`` as an array of length ``q``."""
    kind = CriterionKind(kind)
    ev = _eigs(spec)
    d = ev.size
    check_regime(kind, d, k)
    top = int(max_p(kind, d, k))
    q = top if q is None else int(q)
    if not 1 <= q <= top:
        raise InputError(f"p must lie in [1, {top}] for {kind.value} (got {q})")

    if kind.is_star:
        m, big_n, dim = k - 1, d, k
    else:
        m, big_n, dim = d - 1, k, d
    used = ev[:m]
    if np.any(used <= 0):
        raise NumericError("nonpositive eigenvalue in criterion range")

    p = np.arange(1, q + 1)
    log_head = np.cumsum(np.log(used))[:q]
    # tail sums of l_{p+1..m}; reversed cumsum keeps small terms accurate
    tail_sums = np.cumsum(used[::-1])[::-1]
    tail_mean = tail_sums[p] / (m - p)
    loglik = (
        log_head
        + (m - p) * np.log(tail_mean)
        + m * math.log((big_n - 1) / big_n)
        + m * LOG_2PI_PLUS_1
    )

    if kind is CriterionKind.AicFixed:
        return k * loglik + (p + 1) * (2 * d - p)
    if kind is CriterionKind.BicFixed:
        return k * loglik + math.log(k) * (p + 1) * (d - p / 2)
    if kind.is_bic:
        return loglik + math.log(big_n) * (p + 1) * (dim - p / 2) / big_n
    return loglik + (p + 1) * (2 * dim - p) / big_n


def _single(spec, k, p, kind) -> float:
    p = int(p)
    if p < 1:
        raise InputError("p must be >= 1")
    return float(criterion_values(spec, k, kind, q=p)[-1])


def aic_fixed(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.AicFixed)


def bic_fixed(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.BicFixed)


def aic_circ(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.AicCirc)


def bic_circ(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.BicCirc)


def aic_star(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.AicStar)


def bic_star(spec, k: int, p: int) -> float:
    return _single(spec, k, p, CriterionKind.BicStar)


@dataclass(frozen=True)
class CriterionCurve:
    kind: CriterionKind
    values: np.ndarray  # values[p - 1] for p = 1..q
    k: int
    d: int

    @property
    def q(self) -> int:
        return self.values.size

    @property
    def p_hat(self) -> int:
        # np.argmin returns the first minimiser, i.e. the smallest p
        return int(np.argmin(self.values)) + 1

    def value(self, p: int) -> float:
        return float(self.values[p - 1])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "d": self.d,
            "q": self.q,
            "p_hat": self.p_hat,
            "values": [float(v) for v in self.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        lines = ["p,value"]
        lines += [f"{i},{float(v)!r}" for i, v in enumerate(self.values, start=1)]
        return "\n".join(lines) + "\n"


def estimate_p(spec, k: Optional[int] = None, kind: CriterionKind = CriterionKind.BicFixed,
               q: Optional[int] = None) -> CriterionCurve:
    """Evaluate ``kind`` for p = 1..q and return the curve with its argmin.

    ``k`` defaults to the count stored on the :class:`Spectrum`; ``q``
    defaults to :func:`default_q`.
    """
    kind = CriterionKind(kind)
    ev = _eigs(spec)
    if k is None:
        k = getattr(spec, "k", None)
        if k is None:
            raise InputError("k is required when the spectrum does not carry it")
    d = ev.size
    check_regime(kind, d, int(k))
    if q is None:
        q = default_q(kind, d, int(k))
    values = criterion_values(ev, int(k), kind, q)
    if not np.isfinite(values).all():
        raise NumericError(f"non-finite {kind.value} value")
    return CriterionCurve(kind, values, int(k), d)


def select_regime(d: int, k: int) -> tuple[CriterionKind, CriterionKind]:
    """(AIC, BIC) pair suited to the aspect ratio d / k."""
    if d < 3 or k < 3:
        raise InputError("select_regime needs d >= 3 and k >= 3")
    if k > d:
        return CriterionKind.AicFixed, CriterionKind.BicFixed
    if d > k:
        return CriterionKind.AicStar, CriterionKind.BicStar
    raise RegimeError("c = 1 excluded")
