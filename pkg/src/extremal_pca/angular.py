"""Ingestion, margin standardisation and the empirical angular covariance.

Raw observations are plain ``(n, d)`` float arrays; :func:`as_data_matrix`
validates them.  Extremes are the ``k`` rows with the largest Euclidean norm,
and their directions feed the covariance estimate whose spectrum drives the
information criteria.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import ConstantColumnWarning, InputError

UNIT_NORM_TOL = 1e-10


def as_data_matrix(values) -> np.ndarray:
    """Return ``values`` as a finite float matrix with n >= 1 rows and d >= 2 columns."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise InputError(f"data must be two-dimensional, got shape {x.shape}")
    n, d = x.shape
    if n < 1 or d < 2:
        raise InputError(f"need n >= 1 rows and d >= 2 columns, got {n}x{d}")
    if not np.isfinite(x).all():
        bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
        raise InputError(f"non-finite entries in rows {bad.tolist()[:20]}")
    return x


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv(path, delimiter: str = ",") -> np.ndarray:
    """Read a numeric CSV file with one observation per row.

    A first row containing any non-numeric cell is taken as a header.  Any
    later row with a non-numeric, empty or non-finite cell is an error that
    lists the offending (1-based) line numbers.
    """
    try:
        with open(Path(path), newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter=delimiter)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc

    start = 0
    if rows and not all(_is_number(c) for c in rows[0]):
        start = 1
    data, bad = [], []
    width = None
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row:
            continue
        try:
            vals = [float(c) for c in row]
        except ValueError:
            bad.append(lineno)
            continue
        if not np.isfinite(vals).all() or (width is not None and len(vals) != width):
            bad.append(lineno)
            continue
        width = len(vals)
        data.append(vals)
    if bad:
        raise InputError(f"{path}: invalid rows at lines {bad}")
    if not data:
        raise InputError(f"{path}: no data rows")
    return as_data_matrix(data)


def frechet_margin_transform(data) -> np.ndarray:
    """Map every column to standard Fréchet margins via average ranks.

    Entry ``(i, j)`` becomes ``-1 / log(r_ij / (n + 1))`` where ``r_ij`` is the
    ascending rank within column ``j``.  A constant column triggers a
    :class:`ConstantColumnWarning` but is still transformed.
    """
    x = as_data_matrix(data)
    n = x.shape[0]
    if n < 2:
        raise InputError("margin transform needs n >= 2")
    const = np.flatnonzero((x == x[0]).all(axis=0))
    if const.size:
        warnings.warn(f"constant columns {const.tolist()}: all ranks tied", ConstantColumnWarning, stacklevel=2)
    ranks = rankdata(x, method="average", axis=0)
    return -1.0 / np.log(ranks / (n + 1))


@dataclass(frozen=True)
class AngularSample:
    """Unit directions of the ``k`` largest-norm observations."""

    directions: np.ndarray
    source_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=float)
        if dirs.ndim != 2 or dirs.shape[0] < 1:
            raise InputError("directions must be a non-empty (k, d) array")
        norms = np.linalg.norm(dirs, axis=1)
        if np.abs(norms - 1.0).max() > UNIT_NORM_TOL:
            raise InputError("every direction must have unit norm")
        idx = self.source_indices
        idx = np.arange(dirs.shape[0]) if idx is None else np.asarray(idx, dtype=np.int64)
        if idx.shape != (dirs.shape[0],) or np.unique(idx).size != idx.size:
            raise InputError("source_indices must be k distinct row indices")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "source_indices", idx)

    @property
    def k(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True)
class AngularCovariance:
    matrix: np.ndarray
    k: int

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def select_extremes(data, k: int) -> AngularSample:
    """Directions of the ``k`` rows with the largest Euclidean norm.

    Exactly ``k`` rows are returned; equal norms at the threshold are broken
    in favour of the lower row index.
    """
    x = as_data_matrix(data)
    n = x.shape[0]
    k = int(k)
    if k < 1:
        raise InputError("k must be >= 1")
    if k >= n:
        raise InputError("k must be < n")
    norms = np.linalg.norm(x, axis=1)
    # stable sort on -norm keeps lower indices first among equal norms
    idx = np.argsort(-norms, kind="stable")[:k]
    top = norms[idx]
    if (top == 0).any():
        raise InputError("zero-norm extreme")
    return AngularSample(x[idx] / top[:, None], idx)


def empirical_mean_direction(sample: AngularSample) -> np.ndarray:
    return sample.directions.mean(axis=0)


def empirical_angular_covariance(sample: AngularSample) -> AngularCovariance:
    """``(1/k) * sum (theta_j - mean)(theta_j - mean)^T`` over the k directions.

    Rows are put in lexicographic order first, so the floating-point result
    does not depend on the order in which extremes were listed.
    """
    k = sample.k
    if k < 2:
        raise InputError("need at least two extremes")
    dirs = sample.directions
    dirs = dirs[np.lexsort(dirs.T[::-1])]
    centred = dirs - dirs.mean(axis=0)
    m = centred.T @ centred / k
    return AngularCovariance(0.5 * (m + m.T), k)
