"""Shapley-ranked feature selection and detectors for when it goes wrong."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .game import Attribution, Game, InvalidArgument, exact_shapley, members, popcount, to_mask

PATHOLOGY_TOL = 1e-9


def _sizes(d: int) -> np.ndarray:
    return np.array([popcount(S) for S in range(1 << d)])


@dataclass(frozen=True)
class SelectionResult:
    selected: int
    rule: str
    param: float
    attribution_tag: str
    regret: float | None = None

    def names(self, labels) -> list[str]:
        return [labels[i] for i in members(self.selected, len(labels))]


def _best_of_size(g: Game, k: int) -> float:
    return float(g.values[_sizes(g.d) == k].max())


def top_k(a: Attribution, k: int, game: Game | None = None) -> SelectionResult:
    """The k largest-phi players; equal phi goes to the lower player index."""
    if not 1 <= k <= a.d:
        raise InvalidArgument(f"k={k} outside 1..{a.d}")
    order = sorted(range(a.d), key=lambda i: (-a.phi[i], i))
    chosen = to_mask(order[:k])
    regret = None if game is None else _best_of_size(game, k) - game(chosen)
    return SelectionResult(chosen, "top_k", k, a.game_tag, regret)


def threshold(a: Attribution, tau: float, game: Game | None = None) -> SelectionResult:
    chosen = to_mask(i for i in range(a.d) if a.phi[i] > tau)
    regret = None
    if game is not None:
        regret = _best_of_size(game, popcount(chosen)) - game(chosen)
    return SelectionResult(chosen, "threshold", tau, a.game_tag, regret)


class Optima(NamedTuple):
    best: float
    coalitions: list[int]
    minimal: list[int]


def optimal_coalitions(g: Game, size: int | None = None, tol: float = PATHOLOGY_TOL) -> Optima:
    """Argmax coalitions overall (``size=None``) or among those of exactly ``size`` players.

    Worths within ``tol * max(1, |best|)`` of the best tie.  ``minimal`` holds
    the argmax coalitions of least cardinality; both lists are sorted by
    bitmask, so ``minimal[0]`` is the canonical witness.
    """
    sizes = _sizes(g.d)
    pool = np.arange(1 << g.d) if size is None else np.flatnonzero(sizes == size)
    if pool.size == 0:
        raise InvalidArgument(f"no coalitions of size {size} among {g.d} players")
    vals = g.values[pool]
    best = float(vals.max())
    hits = pool[vals >= best - tol * max(1.0, abs(best))]
    smallest = sizes[hits].min()
    return Optima(best, [int(S) for S in hits], [int(S) for S in hits if sizes[S] == smallest])


def selection_regret(g: Game, k: int) -> float:
    res = top_k(exact_shapley(g), k, g)
    return max(0.0, res.regret)


def detect_taxicab(g: Game, a: Attribution, tol: float = PATHOLOGY_TOL) -> frozenset[int]:
    """Players credited by phi that add nothing to some minimal optimal coalition without them."""
    minimal = optimal_coalitions(g, tol=tol).minimal
    flagged = set()
    for i in range(g.d):
        if a.phi[i] <= tol:
            continue
        for O in minimal:
            if not O >> i & 1 and g.values[O | 1 << i] - g.values[O] <= tol:
                flagged.add(i)
                break
    return frozenset(flagged)


def detect_secret_holder(g: Game, a: Attribution, k: int, tier: str = "relaxed",
                         tol: float = PATHOLOGY_TOL) -> list[tuple[int, int]]:
    """Pairs (i, j): i sits in every size-k optimum yet phi_i < phi_j.

    ``strict`` requires j to be in no size-k optimum; ``relaxed`` only that j
    is missing from at least one.
    """
    if not 1 <= k <= g.d:
        raise InvalidArgument(f"k={k} outside 1..{g.d}")
    if tier not in ("strict", "relaxed"):
        raise InvalidArgument(f"unknown tier {tier!r}")
    optima = optimal_coalitions(g, size=k, tol=tol).coalitions
    in_all = [i for i in range(g.d) if all(O >> i & 1 for O in optima)]
    if tier == "strict":
        outsiders = [j for j in range(g.d) if not any(O >> j & 1 for O in optima)]
    else:
        outsiders = [j for j in range(g.d) if j not in in_all]
    return [(i, j) for i in in_all for j in outsiders if a.phi[i] < a.phi[j]]


def fig3_predicate(g: Game, a: Attribution) -> bool:
    """Secret-holder shape on three players, all inequalities strict:
    phi_2, phi_3 > phi_1 and C({1,2}), C({1,3}) > C({2,3})."""
    if g.d != 3:
        raise InvalidArgument("the secret-holder predicate is defined for three players")
    phi = a.phi
    c = g.values
    return bool(phi[1] > phi[0] and phi[2] > phi[0] and c[0b011] > c[0b110] and c[0b101] > c[0b110])


def markov_rank_check(a: Attribution, boundary: Iterable[int]) -> bool:
    """True when the top-|boundary| selection differs from the boundary."""
    target = to_mask(boundary)
    if target == 0:
        raise InvalidArgument("boundary must be non-empty")
    return top_k(a, popcount(target)).selected != target


def efficiency_waste(g: Game) -> float:
    return max(0.0, float(g.values.max() - g.values[g.grand]))


def penalize(g: Game, lam: float) -> Game:
    """C'(S) = C(S) - lam |S|."""
    if lam < 0:
        raise InvalidArgument("penalty must be >= 0")
    return Game(g.d, g.labels, g.values - lam * _sizes(g.d), g.offset, f"{g.tag}-{lam:g}|S|")


@dataclass
class PathologyReport:
    taxicab_flags: list[str]
    secret_flags: list[tuple[str, str]]
    secret_flags_strict: list[tuple[str, str]]
    markov_violation: bool | None
    efficiency_waste: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "taxicab_flags": self.taxicab_flags,
            "secret_flags": [list(p) for p in self.secret_flags],
            "secret_flags_strict": [list(p) for p in self.secret_flags_strict],
            "markov_violation": self.markov_violation,
            "efficiency_waste": self.efficiency_waste,
            "details": self.details,
        }


def pathology_report(g: Game, a: Attribution | None = None, k: int | None = None,
                     boundary: Iterable[int] | None = None,
                     tol: float = PATHOLOGY_TOL) -> PathologyReport:
    a = a or exact_shapley(g)
    lab = g.labels
    k = k if k is not None else max(1, g.d - 1)
    optima = optimal_coalitions(g, tol=tol)
    size_k = optimal_coalitions(g, size=k, tol=tol)

    def pairs(tier):
        return [(lab[i], lab[j]) for i, j in detect_secret_holder(g, a, k, tier, tol)]

    details = {
        "taxicab_predicate": "phi_i > tol and M_i(O) <= tol for a minimal optimal O excluding i",
        "best_value": optima.best,
        "minimal_optimal": [g.describe(S) for S in optima.minimal],
        "k": k,
        "size_k_optimal": [g.describe(S) for S in size_k.coalitions],
        "shapley_top_k": g.describe(top_k(a, k).selected),
        "selection_regret": selection_regret(g, k),
    }
    if g.d == 3:
        details["fig3_predicate"] = fig3_predicate(g, a)
    violation = None if boundary is None else markov_rank_check(a, boundary)
    return PathologyReport(
        taxicab_flags=[lab[i] for i in sorted(detect_taxicab(g, a, tol))],
        secret_flags=pairs("relaxed"),
        secret_flags_strict=pairs("strict"),
        markov_violation=violation,
        efficiency_waste=efficiency_waste(g),
        details=details,
    )
