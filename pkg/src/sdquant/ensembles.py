"""Seeded sub-Gaussian frame ensembles and sparse test signals.

Every draw comes from numpy's Philox4x64 counter-based generator keyed by a
``SeedSequence`` built from the user seed plus a short tuple of stream tags,
so a given (seed, tags) pair always produces the same numbers regardless of
what else was drawn before. Gaussian variates use numpy's ziggurat sampler,
a deterministic integer-driven transform of the Philox output.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

SQRT3 = np.sqrt(3.0)


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    UNIFORM_BOUNDED = "uniform_bounded"


class Normalization(str, Enum):
    UNIT_VARIANCE = "unit_variance"
    ONE_OVER_SQRT_M = "one_over_sqrt_m"


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """Independent Philox stream for ``seed`` and integer ``tags``."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(t) for t in tags))
    return np.random.Generator(np.random.Philox(ss))


def entry_bound(family: Family | str) -> float:
    """Almost-sure bound K on unit-variance entries, inf if unbounded."""
    family = Family(family)
    return {Family.GAUSSIAN: np.inf, Family.BERNOULLI: 1.0, Family.UNIFORM_BOUNDED: SQRT3}[family]


@dataclass(frozen=True)
class FrameEnsembleSpec:
    family: Family
    m: int
    k: int
    normalization: Normalization = Normalization.ONE_OVER_SQRT_M
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.m < 1 or self.k < 1:
            raise ValueError("dimensions must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> str:
        doc = asdict(self)
        doc["family"] = self.family.value
        doc["normalization"] = self.normalization.value
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FrameEnsembleSpec":
        doc = json.loads(text)
        unknown = set(doc) - {"family", "m", "k", "normalization", "seed"}
        if unknown:
            raise ValueError(f"unknown keys in frame spec: {sorted(unknown)}")
        return cls(**doc)


def sample_entries(rng: np.random.Generator, family: Family | str, shape) -> np.ndarray:
    """Mean-zero, unit-variance i.i.d. entries."""
    family = Family(family)
    if family is Family.GAUSSIAN:
        return rng.standard_normal(shape)
    if family is Family.BERNOULLI:
        return 2.0 * rng.integers(0, 2, size=shape) - 1.0
    return rng.uniform(-SQRT3, SQRT3, size=shape)


def draw_frame(spec: FrameEnsembleSpec, *tags: int) -> np.ndarray:
    rng = rng_for(spec.seed, 0, spec.m, spec.k, *tags)
    e = sample_entries(rng, spec.family, (spec.m, spec.k))
    if spec.normalization is Normalization.ONE_OVER_SQRT_M:
        e /= np.sqrt(spec.m)
    return e


@dataclass(frozen=True)
class SparseSignalSpec:
    n: int
    k: int
    min_magnitude: float
    max_magnitude: float
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if not 0 < self.min_magnitude <= self.max_magnitude:
            raise ValueError("need 0 < min_magnitude <= max_magnitude")


def draw_sparse_signal(spec: SparseSignalSpec, *tags: int) -> np.ndarray:
    """k-sparse vector: uniform random support, magnitudes in [min, max], random signs."""
    rng = rng_for(spec.seed, 1, spec.n, spec.k, *tags)
    support = rng.choice(spec.n, size=spec.k, replace=False)
    mags = rng.uniform(spec.min_magnitude, spec.max_magnitude, size=spec.k)
    signs = 2.0 * rng.integers(0, 2, size=spec.k) - 1.0
    z = np.zeros(spec.n)
    z[support] = signs * mags
    return z


def draw_unit_vector(k: int, seed: int, *tags: int) -> np.ndarray:
    """Uniform draw from the unit sphere in R^k."""
    rng = rng_for(seed, 2, *tags)
    x = rng.standard_normal(k)
    return x / np.linalg.norm(x)
