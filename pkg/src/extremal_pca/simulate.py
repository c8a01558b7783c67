"""Seeded generators for the three validation models and a replication harness.

Models
------
directional
    ``X = (S^{1/2} V / ||S^{1/2} V||) Z`` with ``S = diag(spikes, 1, ..., 1)``,
    ``V`` i.i.d. standard normal (or Rademacher) and ``Z`` standard Fréchet.
noisy-directional
    The directional model plus ``|N(0, (100/d) I)|`` noise per row.
spiked-angular-gaussian
    ``X = N Z`` with ``N ~ N(0, H)``, ``H = sum_i l_i v_i v_i^T + bulk * I`` and
    orthonormal ``v_i`` drawn once per experiment seed.

Replication ``r`` of an experiment with seed ``s`` draws from a generator
seeded by ``splitmix64(s ^ r)``, so results do not depend on scheduling.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .angular import empirical_angular_covariance, select_extremes
from .criteria import CriterionKind, check_regime, default_q, estimate_p, max_p
from .errors import ExtremalPCAError, InputError
from .spectrum import eigenvalues_descending

MASK64 = (1 << 64) - 1
NOISE_SCALE = 100.0


class Model(str, Enum):
    Directional = "directional"
    NoisyDirectional = "noisy-directional"
    SpikedAngularGaussian = "spiked-angular-gaussian"


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finaliser."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def child_seed(seed: int, replication: int) -> int:
    return splitmix64((int(seed) ^ int(replication)) & MASK64)


def resolve_k(k: Union[int, float], n: int) -> int:
    """Turn an extreme count or a fraction of ``n`` into a count.

    Fractions in (0, 1) are rounded half up, then clamped to ``[3, n - 1]``.
    Integers are returned unchanged after a positivity check.
    """
    if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
        if k < 1:
            raise InputError(f"k must be a positive count, got {k}")
        return int(k)
    k = float(k)
    if k.is_integer() and k >= 1:
        return int(k)
    if not 0 < k < 1:
        raise InputError(f"k must be a positive count or a fraction in (0, 1), got {k}")
    count = math.floor(k * n + 0.5)
    return int(min(max(count, 3), n - 1))


@dataclass(frozen=True)
class ModelSpec:
    model: Model
    d: int
    n: int
    p_star: int
    spike_values: tuple = ()
    k: Union[int, float] = 0.1
    seed: int = 0
    bulk_lambda: float = 1.0
    v_dist: str = "normal"

    def __post_init__(self):
        try:
            object.__setattr__(self, "model", Model(self.model))
        except ValueError:
            raise InputError(f"unknown model {self.model!r}") from None
        spikes = self.spike_values
        if np.isscalar(spikes):
            spikes = (float(spikes),) * self.p_star
        spikes = tuple(float(s) for s in spikes)
        object.__setattr__(self, "spike_values", spikes)
        if self.d < 2 or self.n < 2:
            raise InputError("need d >= 2 and n >= 2")
        if not 0 <= self.p_star < self.d:
            raise InputError(f"p_star must satisfy 0 <= p_star < d (p_star={self.p_star}, d={self.d})")
        if len(spikes) != self.p_star:
            raise InputError("need exactly p_star spike values")
        if any(a < b for a, b in zip(spikes, spikes[1:])):
            raise InputError("spike values must be descending")
        if self.model is Model.SpikedAngularGaussian:
            if not self.bulk_lambda > 0:
                raise InputError("bulk_lambda must be positive")
            if spikes and not self.bulk_lambda < min(spikes):
                raise InputError("bulk_lambda must be below every spike value")
        elif any(s <= 1 for s in spikes):
            raise InputError("directional spike values must exceed 1")
        if self.v_dist not in ("normal", "rademacher"):
            raise InputError(f"unknown v_dist {self.v_dist!r}")
        resolve_k(self.k, self.n)

    @property
    def k_count(self) -> int:
        return resolve_k(self.k, self.n)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["model"] = self.model.value
        out["spike_values"] = list(self.spike_values)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        try:
            return cls(**data)
        except TypeError as exc:
            raise InputError(f"invalid model spec: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid model spec JSON: {exc}") from exc
        return cls.from_dict(data)


def frechet_from_uniform(u):
    return -1.0 / np.log(u)


def sample_frechet(n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    zero = u == 0
    while zero.any():
        u[zero] = rng.random(zero.sum())
        zero = u == 0
    return frechet_from_uniform(u)


def _directions(spec: ModelSpec, rng) -> np.ndarray:
    scale = np.ones(spec.d)
    scale[: spec.p_star] = spec.spike_values
    if spec.v_dist == "rademacher":
        v = rng.choice(np.array([-1.0, 1.0]), size=(spec.n, spec.d))
    else:
        v = rng.standard_normal((spec.n, spec.d))
    w = v * np.sqrt(scale)
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def sample_directional(spec: ModelSpec, rng) -> np.ndarray:
    if spec.model is not Model.Directional:
        raise InputError("spec is not a directional model")
    return _directions(spec, rng) * sample_frechet(spec.n, rng)[:, None]


def sample_noise(n: int, d: int, rng) -> np.ndarray:
    return np.abs(rng.normal(0.0, math.sqrt(NOISE_SCALE / d), size=(n, d)))


def noise_norm_variance(d: int) -> float:
    """Exact ``Var ||eps||`` for ``eps ~ |N(0, (100/d) I_d)|`` (a scaled chi law)."""
    ratio = math.exp(gammaln((d + 1) / 2) - gammaln(d / 2))
    return NOISE_SCALE / d * (d - 2 * ratio**2)


def sample_noisy_directional(spec: ModelSpec, rng) -> np.ndarray:
    if spec.model is not Model.NoisyDirectional:
        raise InputError("spec is not a noisy directional model")
    x = _directions(spec, rng) * sample_frechet(spec.n, rng)[:, None]
    return x + sample_noise(spec.n, spec.d, rng)


def random_orthonormal_vectors(p: int, d: int, rng) -> np.ndarray:
    """``d x p`` matrix with Haar-distributed orthonormal columns."""
    if not 0 <= p <= d:
        raise InputError("need 0 <= p <= d")
    if p == 0:
        return np.zeros((d, 0))
    q, r = np.linalg.qr(rng.standard_normal((d, p)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def spike_vectors(spec: ModelSpec) -> np.ndarray:
    """The experiment-level ``v_i``; one draw per spec seed."""
    rng = np.random.default_rng(splitmix64(~int(spec.seed) & MASK64))
    return random_orthonormal_vectors(spec.p_star, spec.d, rng)


def spiked_covariance_matrix(spec: ModelSpec, vectors: Optional[np.ndarray] = None) -> np.ndarray:
    v = spike_vectors(spec) if vectors is None else vectors
    return (v * np.asarray(spec.spike_values)) @ v.T + spec.bulk_lambda * np.eye(spec.d)


def sample_spiked_angular_gaussian(spec: ModelSpec, rng, vectors: Optional[np.ndarray] = None) -> np.ndarray:
    if spec.model is not Model.SpikedAngularGaussian:
        raise InputError("spec is not a spiked angular Gaussian model")
    v = spike_vectors(spec) if vectors is None else vectors
    # N = sqrt(bulk) G + sum_i sqrt(l_i) g_i v_i has covariance H exactly
    g = rng.standard_normal((spec.n, spec.d)) * math.sqrt(spec.bulk_lambda)
    h = rng.standard_normal((spec.n, spec.p_star)) * np.sqrt(spec.spike_values)
    normal = g + h @ v.T
    return normal * sample_frechet(spec.n, rng)[:, None]


def sample(spec: ModelSpec, rng, vectors=None) -> np.ndarray:
    if spec.model is Model.Directional:
        return sample_directional(spec, rng)
    if spec.model is Model.NoisyDirectional:
        return sample_noisy_directional(spec, rng)
    return sample_spiked_angular_gaussian(spec, rng, vectors)


@dataclass
class ExperimentResult:
    spec: ModelSpec
    replications: int
    p_hats: dict = field(default_factory=dict)  # CriterionKind -> int array
    q: dict = field(default_factory=dict)  # CriterionKind -> q used

    def to_csv(self, header: str = "") -> str:
        lines = [f"# {header}"] if header else []
        lines.append("replication,kind,p_hat")
        for r in range(self.replications):
            for kind, vals in self.p_hats.items():
                lines.append(f"{r},{kind.value},{int(vals[r])}")
        return "\n".join(lines) + "\n"

    def histograms(self) -> dict:
        out = {}
        for kind, vals in self.p_hats.items():
            uniq, counts = np.unique(vals, return_counts=True)
            out[kind.value] = {str(int(u)): int(c) for u, c in zip(uniq, counts)}
        return out

    def summary(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "k": self.spec.k_count,
            "replications": self.replications,
            "q": {kind.value: q for kind, q in self.q.items()},
            "histogram": self.histograms(),
        }


def _replicate(args):
    spec, r, kinds, qs, vectors = args
    rng = np.random.default_rng(child_seed(spec.seed, r))
    try:
        x = sample(spec, rng, vectors)
        sample_dirs = select_extremes(x, spec.k_count)
        spectrum = eigenvalues_descending(empirical_angular_covariance(sample_dirs))
        return [estimate_p(spectrum, spectrum.k, kind, q).p_hat for kind, q in zip(kinds, qs)]
    except ExtremalPCAError as exc:
        raise type(exc)(f"replication {r}: {exc}") from exc


def run_experiment(spec: ModelSpec, replications: int, kinds: Sequence[CriterionKind],
                   q: Optional[int] = None, workers: int = 1) -> ExperimentResult:
    """Run ``replications`` independent fits and collect p_hat per criterion.

    ``q`` is shared by every kind; when omitted each kind uses its default.
    Output is identical for any ``workers`` value.
    """
    if replications < 1:
        raise InputError("replications must be >= 1")
    kinds = [CriterionKind(kd) for kd in kinds]
    k = spec.k_count
    if k >= spec.n:
        raise InputError("k must be < n")
    qs = []
    for kind in kinds:
        check_regime(kind, spec.d, k)
        kq = default_q(kind, spec.d, k) if q is None else int(q)
        if not 1 <= kq <= max_p(kind, spec.d, k):
            raise InputError(f"q={kq} outside the admissible range for {kind.value}")
        qs.append(kq)
    vectors = spike_vectors(spec) if spec.model is Model.SpikedAngularGaussian else None
    jobs = [(spec, r, kinds, qs, vectors) for r in range(replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_replicate, jobs, chunksize=max(1, replications // (4 * workers))))
    else:
        rows = [_replicate(job) for job in jobs]
    arr = np.array(rows, dtype=np.int64).reshape(replications, len(kinds))
    return ExperimentResult(
        spec, replications,
        {kind: arr[:, i] for i, kind in enumerate(kinds)},
        dict(zip(kinds, qs)),
    )
