"""Seeded samplers and exact population descriptions for the simulation DGPs.

Every sampled column draws from its own PCG64 stream whose seed is
``mix64(seed, column_index)``, so adding or reordering columns leaves the
other columns untouched.  Gaussian draws use numpy's ziggurat
``standard_normal``; bit-level reproducibility is promised only within this
implementation and numpy's stream-compatibility guarantees.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .game import InvalidArgument

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z = (z + GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(*words: int) -> int:
    """Fold 64-bit words into one seed: h <- splitmix64(h ^ w) for each word."""
    h = 0
    for w in words:
        h = splitmix64(h ^ (int(w) & MASK64))
    return h


def stream(seed: int, column: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix64(seed, column)))


@dataclass(frozen=True)
class GaussMarkov:
    pass


@dataclass(frozen=True)
class DiscreteMarkov:
    ell: float

    def __post_init__(self):
        if not 0.0 < self.ell < 1.0:
            raise InvalidArgument(f"ell must lie in (0, 1), got {self.ell}")


@dataclass(frozen=True)
class SecretInteraction:
    t1: float
    t2: float

    def coefficients(self) -> dict[int, float]:
        """Term bitmask -> coefficient; X2, X3 get t1 and X1X2, X1X3 get t2."""
        return {0b010: self.t1, 0b100: self.t1, 0b011: self.t2, 0b101: self.t2}


@dataclass(frozen=True)
class TaxicabMax:
    a: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if not a or any(not math.isfinite(x) for x in a):
            raise InvalidArgument("a must be a non-empty list of finite offsets")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise InvalidArgument(f"a must be strictly increasing, got {a}")
        object.__setattr__(self, "a", a)


Variant = Union[GaussMarkov, DiscreteMarkov, SecretInteraction, TaxicabMax]


@dataclass(frozen=True)
class DgpSpec:
    variant: Variant
    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument(f"n must be >= 1, got {self.n}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    spec: DgpSpec | None = None

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.shape != (self.x.shape[0],):
            raise InvalidArgument("x must be n x d and y length n")
        if len(self.names) != self.x.shape[1]:
            raise InvalidArgument("one name per feature column required")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise InvalidArgument("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.x[:, self.names.index(name)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*self.names, "y"])
            for row, target in zip(self.x, self.y):
                w.writerow([format(v, ".17g") for v in (*row, target)])


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """Exact population law: a covariance over ``names`` or a discrete joint table.

    For a joint table, axis ``k`` of ``joint_table`` runs over ``levels[k]``
    and the last axis is the response.
    """

    names: tuple[str, ...]
    covariance: np.ndarray | None = None
    joint_table: np.ndarray | None = None
    levels: tuple[tuple[float, ...], ...] = field(default=())

    def __post_init__(self):
        if (self.covariance is None) == (self.joint_table is None):
            raise InvalidArgument("supply exactly one of covariance or joint_table")
        if self.covariance is not None:
            c = self.covariance
            if c.shape != (len(self.names),) * 2 or not np.allclose(c, c.T):
                raise InvalidArgument("covariance must be square, symmetric and match names")
            if np.linalg.eigvalsh(c).min() < -1e-10:
                raise InvalidArgument("covariance is not positive semidefinite")
        else:
            t = self.joint_table
            if t.ndim != len(self.names) or np.any(t < 0) or abs(t.sum() - 1.0) > 1e-12:
                raise InvalidArgument("joint table must be a probability table over names")

    def cov(self, a: str, b: str) -> float:
        i, j = self.names.index(a), self.names.index(b)
        return float(self.covariance[i, j])


# ---- Gauss-Markov: X1, X2, X3 ~ N(0, 4); Y and Z share X1+X2+X3 ----

GM_NAMES = ("X1", "X2", "X3", "Z")


def sample_gauss_markov(n: int, seed: int) -> Dataset:
    spec = DgpSpec(GaussMarkov(), n, seed)
    xs = [2.0 * stream(seed, k).standard_normal(n) for k in range(3)]
    signal = xs[0] + xs[1] + xs[2]
    z = signal + 2.0 * stream(seed, 3).standard_normal(n)
    y = signal + 2.0 * stream(seed, 4).standard_normal(n)
    return Dataset(np.column_stack([*xs, z]), y, GM_NAMES, spec)


def population_gauss_markov() -> PopulationModel:
    names = (*GM_NAMES, "Y")
    # loadings on (X1, X2, X3, gamma, eps), each source with variance 4
    load = np.array([
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 1, 0, 0],
        [1, 1, 1, 1, 0],
        [1, 1, 1, 0, 1],
    ], dtype=float)
    return PopulationModel(names, covariance=4.0 * load @ load.T)


# ---- discrete Markov: X1 uniform on 1..4 drives binary X2, X3; Y depends on X2, X3 ----

DM_NAMES = ("X1", "X2", "X3")
DM_X1_LEVELS = (1, 2, 3, 4)
# P(Y=1 | X2, X3)
DM_Y_GIVEN = np.array([[0.9, 0.05], [0.15, 0.9]])


def _dm_conditionals(ell: float) -> tuple[np.ndarray, np.ndarray]:
    """P(X2=1 | X1) and P(X3=1 | X1) for X1 = 1..4.

    The printed table has entries ``ell - 1``; they are read as ``1 - ell``.
    """
    p2 = np.array([ell, ell, 1 - ell, 1 - ell])
    p3 = np.array([ell, 1 - ell, ell, 1 - ell])
    return p2, p3


def joint_discrete_markov(ell: float) -> PopulationModel:
    DiscreteMarkov(ell)
    p2, p3 = _dm_conditionals(ell)
    px2 = np.stack([1 - p2, p2], axis=1)   # [x1, x2]
    px3 = np.stack([1 - p3, p3], axis=1)   # [x1, x3]
    py = np.stack([1 - DM_Y_GIVEN, DM_Y_GIVEN], axis=-1)  # [x2, x3, y]
    table = 0.25 * px2[:, :, None, None] * px3[:, None, :, None] * py[None, :, :, :]
    levels = (DM_X1_LEVELS, (0, 1), (0, 1), (0, 1))
    return PopulationModel((*DM_NAMES, "Y"), joint_table=table, levels=levels)


def sample_discrete_markov(ell: float, n: int, seed: int) -> Dataset:
    spec = DgpSpec(DiscreteMarkov(ell), n, seed)
    p2, p3 = _dm_conditionals(ell)
    idx = stream(seed, 0).integers(0, 4, size=n)
    x2 = (stream(seed, 1).random(n) < p2[idx]).astype(np.int64)
    x3 = (stream(seed, 2).random(n) < p3[idx]).astype(np.int64)
    y = (stream(seed, 3).random(n) < DM_Y_GIVEN[x2, x3]).astype(float)
    x = np.column_stack([idx + 1, x2, x3]).astype(float)
    return Dataset(x, y, DM_NAMES, spec)


# ---- secret interaction: Y = t1 (X2 + X3) + t2 (X1 X2 + X1 X3) + eps ----

SECRET_NAMES = ("X1", "X2", "X3")


def secret_terms(x: np.ndarray, term: int) -> np.ndarray:
    """Product of the columns named by the bitmask ``term``."""
    out = np.ones(x.shape[0])
    for i in range(x.shape[1]):
        if term >> i & 1:
            out = out * x[:, i]
    return out


def sample_secret(t1: float, t2: float, n: int, seed: int) -> Dataset:
    variant = SecretInteraction(float(t1), float(t2))
    spec = DgpSpec(variant, n, seed)
    x = np.column_stack([stream(seed, k).standard_normal(n) for k in range(3)])
    y = stream(seed, 3).standard_normal(n)
    for term, beta in variant.coefficients().items():
        y = y + beta * secret_terms(x, term)
    return Dataset(x, y, SECRET_NAMES, spec)


# ---- taxicab max: X_i = a_i + N(0,1); Y = max_i X_i + eps ----

def sample_taxicab_max(a: Sequence[float], n: int, seed: int) -> Dataset:
    variant = TaxicabMax(tuple(a))
    spec = DgpSpec(variant, n, seed)
    d = len(variant.a)
    x = np.column_stack([variant.a[k] + stream(seed, k).standard_normal(n) for k in range(d)])
    y = x.max(axis=1) + stream(seed, d).standard_normal(n)
    return Dataset(x, y, tuple(f"X{k + 1}" for k in range(d)), spec)
