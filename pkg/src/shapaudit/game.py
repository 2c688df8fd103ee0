"""TU games on a complete coalition lattice and their exact Shapley values.

Coalitions are integer bitmasks: bit ``i`` set means player ``i`` (0-based) is
present.  A :class:`Game` stores the dense table of all ``2**d`` worths,
normalized so that the empty coalition is worth exactly zero.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

MAX_PLAYERS = 25
PERMUTATION_MAX_PLAYERS = 8

EFFICIENCY_TOL = 1e-9
MONOTONE_SLACK = 1e-12


class InvalidArgument(ValueError):
    pass


class CapacityError(InvalidArgument):
    pass


class ValidationError(ValueError):
    """Malformed external data (game files, datasets)."""


class NumericError(ArithmeticError):
    pass


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def to_mask(players: Iterable[int]) -> int:
    bits = 0
    for p in players:
        bits |= 1 << p
    return bits


def members(bits: int, d: int) -> tuple[int, ...]:
    return tuple(i for i in range(d) if bits >> i & 1)


@dataclass(frozen=True)
class Coalition:
    bits: int
    d: int

    def __post_init__(self):
        if not 0 <= self.d <= MAX_PLAYERS:
            raise CapacityError(f"player count {self.d} outside 0..{MAX_PLAYERS}")
        if not 0 <= self.bits < 1 << self.d:
            raise InvalidArgument(f"bitmask {self.bits} out of range for d={self.d}")

    @classmethod
    def of(cls, players: Iterable[int], d: int) -> "Coalition":
        return cls(to_mask(players), d)

    @property
    def size(self) -> int:
        return popcount(self.bits)

    @property
    def members(self) -> tuple[int, ...]:
        return members(self.bits, self.d)

    def __contains__(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def __int__(self) -> int:
        return self.bits


def _bits(S) -> int:
    return S.bits if isinstance(S, Coalition) else int(S)


@dataclass(frozen=True, eq=False)
class Game:
    """Normalized TU game.

    ``values[S]`` is the worth of coalition ``S`` minus the raw worth of the
    empty coalition, which is kept in ``offset``.  Build games through
    :meth:`from_values` unless the table is already normalized.
    """

    d: int
    labels: tuple[str, ...]
    values: np.ndarray
    offset: float = 0.0
    tag: str = "custom"
    # the un-normalized table as supplied, kept so serialization is bit-exact
    raw: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidArgument("a game needs at least one player")
        if self.d > MAX_PLAYERS:
            raise CapacityError(f"d={self.d} exceeds the exact-lattice limit {MAX_PLAYERS}")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != self.d:
            raise InvalidArgument(f"expected {self.d} labels, got {len(labels)}")
        if len(set(labels)) != self.d or any(not x for x in labels):
            raise InvalidArgument("player labels must be distinct and non-empty")
        values = np.array(self.values, dtype=float)
        if values.shape != (1 << self.d,):
            raise InvalidArgument(f"value table must have length 2**{self.d}, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("value table contains non-finite entries")
        if values[0] != 0.0:
            raise InvalidArgument("values[empty] must be 0; use Game.from_values to normalize")
        values.flags.writeable = False
        if self.raw is not None:
            raw = np.array(self.raw, dtype=float)
            if raw.shape != values.shape:
                raise InvalidArgument("raw table shape differs from values")
            raw.flags.writeable = False
            object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_values(cls, raw: Sequence[float], labels: Sequence[str] | None = None,
                    tag: str = "custom") -> "Game":
        raw = np.asarray(raw, dtype=float)
        n = raw.shape[0] if raw.ndim == 1 else -1
        if n < 2 or n & (n - 1):
            raise InvalidArgument(f"value table length {n} is not a power of two >= 2")
        d = n.bit_length() - 1
        if labels is None:
            labels = [str(i + 1) for i in range(d)]
        offset = float(raw[0])
        return cls(d=d, labels=tuple(labels), values=raw - offset, offset=offset, tag=tag, raw=raw)

    @classmethod
    def from_function(cls, fn, d: int, labels: Sequence[str] | None = None,
                      tag: str = "custom") -> "Game":
        """Tabulate ``fn(bits)`` over every coalition."""
        if d > MAX_PLAYERS:
            raise CapacityError(f"d={d} exceeds the exact-lattice limit {MAX_PLAYERS}")
        return cls.from_values([fn(S) for S in range(1 << d)], labels, tag)

    @property
    def grand(self) -> int:
        return (1 << self.d) - 1

    @property
    def raw_values(self) -> np.ndarray:
        if self.raw is not None:
            return self.raw
        return self.values + self.offset

    def __call__(self, S) -> float:
        return float(self.values[_bits(S)])

    def value_of(self, players: Iterable[int]) -> float:
        return float(self.values[to_mask(players)])

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidArgument(f"unknown player {label!r}") from None

    def describe(self, S) -> str:
        return "{" + ",".join(self.labels[i] for i in members(_bits(S), self.d)) + "}"


@dataclass(frozen=True, eq=False)
class Attribution:
    phi: np.ndarray
    game_tag: str
    method: str = "exact_subset"
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        if self.labels and len(self.labels) != len(phi):
            raise InvalidArgument("labels and phi lengths differ")

    @property
    def d(self) -> int:
        return len(self.phi)

    def as_dict(self) -> dict[str, float]:
        labels = self.labels or tuple(str(i + 1) for i in range(self.d))
        return {k: float(v) for k, v in zip(labels, self.phi)}


def shapley_weight(s: int, d: int) -> float:
    """Weight ``s!(d-s-1)!/d!`` of a size-``s`` coalition, exact until the final division."""
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    if not 0 <= s <= d - 1:
        raise InvalidArgument(f"coalition size {s} outside 0..{d - 1}")
    return float(Fraction(math.factorial(s) * math.factorial(d - s - 1), math.factorial(d)))


def _popcounts(d: int) -> np.ndarray:
    counts = np.zeros(1 << d, dtype=np.uint8)
    for i in range(d):
        counts.reshape(-1, 2, 1 << i)[:, 1, :] += 1
    return counts


def marginal_contribution(g: Game, i: int, S) -> float:
    S = _bits(S)
    if not 0 <= i < g.d:
        raise InvalidArgument(f"player {i} outside 0..{g.d - 1}")
    if S >> i & 1:
        raise InvalidArgument(f"player {i} already in coalition {g.describe(S)}")
    return float(g.values[S | 1 << i] - g.values[S])


def marginal_table(g: Game, i: int) -> np.ndarray:
    """M_i(S) for every S not containing i, indexed by S with bit i squeezed out."""
    v = g.values.reshape(-1, 2, 1 << i)
    return (v[:, 1, :] - v[:, 0, :]).reshape(-1)


def exact_shapley(g: Game) -> Attribution:
    if g.d > MAX_PLAYERS:
        raise CapacityError(f"d={g.d} exceeds {MAX_PLAYERS}")
    d = g.d
    weights = np.array([shapley_weight(s, d) for s in range(d)])
    # bit i squeezed out leaves a (d-1)-player lattice with the same popcounts
    w = weights[_popcounts(d - 1)]
    with np.errstate(over="ignore", invalid="ignore"):
        phi = np.array([np.dot(w, marginal_table(g, i)) for i in range(d)])
    if not np.all(np.isfinite(phi)):
        raise NumericError("Shapley values overflowed; rescale the game")
    return Attribution(phi, g.tag, "exact_subset", g.labels)


def permutation_shapley(g: Game) -> Attribution:
    """Average marginal contribution over all d! arrival orders (test oracle)."""
    if g.d > PERMUTATION_MAX_PLAYERS:
        raise CapacityError(f"permutation oracle limited to d <= {PERMUTATION_MAX_PLAYERS}")
    total = [0.0] * g.d
    count = 0
    for order in itertools.permutations(range(g.d)):
        S = 0
        for i in order:
            total[i] += g.values[S | 1 << i] - g.values[S]
            S |= 1 << i
        count += 1
    return Attribution([t / count for t in total], g.tag, "permutation_oracle", g.labels)


def restrict(g: Game, i: int) -> Game:
    """Subgame on F minus player i."""
    if g.d < 2:
        raise InvalidArgument("cannot restrict a one-player game")
    if not 0 <= i < g.d:
        raise InvalidArgument(f"player {i} outside 0..{g.d - 1}")
    def drop(table):
        return table.reshape(-1, 2, 1 << i)[:, 0, :].reshape(-1)

    labels = g.labels[:i] + g.labels[i + 1:]
    raw = None if g.raw is None else drop(g.raw)
    return Game(g.d - 1, labels, drop(g.values), g.offset, f"{g.tag}-{g.labels[i]}", raw)


def _check_compatible(g: Game, h: Game):
    if g.d != h.d:
        raise InvalidArgument(f"player counts differ: {g.d} vs {h.d}")
    if g.labels != h.labels:
        raise InvalidArgument(f"player labels differ: {g.labels} vs {h.labels}")


def add_games(g: Game, h: Game) -> Game:
    _check_compatible(g, h)
    return Game(g.d, g.labels, g.values + h.values, g.offset + h.offset, f"{g.tag}+{h.tag}")


def scale_game(g: Game, alpha: float) -> Game:
    return Game(g.d, g.labels, alpha * g.values, alpha * g.offset, f"{alpha:g}*{g.tag}")


def zero_game(d: int, labels: Sequence[str] | None = None) -> Game:
    return Game.from_values(np.zeros(1 << d), labels, tag="zero")


def permute_players(g: Game, perm: Sequence[int]) -> Game:
    """Game in which new player ``k`` is old player ``perm[k]``."""
    if sorted(perm) != list(range(g.d)):
        raise InvalidArgument("perm must be a permutation of the players")
    index = np.zeros(1 << g.d, dtype=np.int64)
    for k, old in enumerate(perm):
        index |= ((np.arange(1 << g.d) >> k) & 1) << old
    return Game(g.d, tuple(g.labels[p] for p in perm), g.values[index], g.offset, g.tag)


class MonotonicityCheck(NamedTuple):
    monotone: bool
    edge: tuple[int, int] | None


def is_monotonic(g: Game, slack: float = MONOTONE_SLACK) -> MonotonicityCheck:
    """Scan every lattice edge S -> S+{i}; report the first decreasing one.

    Edges are visited by player, then by S in increasing bitmask order.
    """
    for i in range(g.d):
        drops = np.flatnonzero(marginal_table(g, i) < -slack)
        if drops.size:
            low = int(drops[0]) & ((1 << i) - 1)
            S = ((int(drops[0]) >> i) << (i + 1)) | low
            return MonotonicityCheck(False, (S, S | 1 << i))
    return MonotonicityCheck(True, None)
