"""Descending eigenvalues of an angular covariance and scree diagnostics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .angular import AngularCovariance
from .errors import InputError, NumericError

NEG_SLACK = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted non-increasingly, with the (d, k) they came from."""

    eigenvalues: np.ndarray
    d: int
    k: Optional[int] = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size != self.d:
            raise InputError(f"expected {self.d} eigenvalues, got shape {ev.shape}")
        if np.any(np.diff(ev) > 0):
            raise InputError("eigenvalues must be non-increasing")
        if ev.size and ev[-1] < 0:
            raise InputError("eigenvalues must be non-negative")
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return self.d

    def scaled(self, s: float) -> "Spectrum":
        return Spectrum(self.eigenvalues * s, self.d, self.k)


def eigenvalues_descending(cov) -> Spectrum:
    """Spectrum of a symmetric matrix, largest eigenvalue first.

    Accepts an :class:`AngularCovariance` or a bare square array.  Values in
    ``[-1e-8, 0)`` are clamped to zero; anything more negative is rejected as
    a malformed (non-PSD) input.  Values within round-off of zero, i.e. below
    ``d * eps * max(l_1, 1)`` for angular covariances (unit-vector data) and
    ``d * eps * l_1`` for bare arrays, are also set to zero.
    """
    if isinstance(cov, AngularCovariance):
        m, k = cov.matrix, cov.k
    else:
        m, k = np.asarray(cov, dtype=float), None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NumericError("matrix has non-finite entries")
    ev = np.linalg.eigvalsh(m)[::-1].copy()
    if ev.size and ev[-1] < -NEG_SLACK:
        raise NumericError(f"matrix is not positive semidefinite (min eigenvalue {ev[-1]:.3g})")
    if ev.size:
        scale = max(ev[0], 1.0) if k is not None else ev[0]
        ev[ev <= m.shape[0] * np.finfo(float).eps * scale] = 0.0
    return Spectrum(ev, m.shape[0], k)


@dataclass(frozen=True)
class ScreeTable:
    scaled: np.ndarray
    increments: np.ndarray
    lambda1: float


def scree(spec: Spectrum, limit: Optional[int] = None) -> ScreeTable:
    """First ``limit`` eigenvalues divided by the largest, and their scaled drops."""
    ev = spec.eigenvalues
    limit = spec.d if limit is None else int(limit)
    if not 1 <= limit <= spec.d:
        raise InputError(f"limit must lie in [1, {spec.d}]")
    lam1 = ev[0]
    if lam1 <= 0:
        raise NumericError("degenerate spectrum")
    head = ev[:limit]
    return ScreeTable(head / lam1, (head[:-1] - head[1:]) / lam1, float(lam1))


def write_scree_csv(path, values, lambda1: float, header: str = "") -> None:
    """Two-column ``index,value`` CSV; ``lambda1`` is stored in a comment line."""
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write(f"# lambda1={float(lambda1)!r}\n")
        fh.write("index,value\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{float(v)!r}\n")


def read_scree_csv(path) -> tuple[np.ndarray, float]:
    """Inverse of :func:`write_scree_csv`: returns (values, lambda1)."""
    lambda1 = float("nan")
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# lambda1="):
                lambda1 = float(line.split("=", 1)[1])
            elif line and not line.startswith("#") and not line.startswith("index"):
                vals.append(float(line.split(",")[1]))
    return np.array(vals), lambda1
