"""Numeric audits of the Shapley axioms on concrete games."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from .game import (
    Attribution,
    Game,
    InvalidArgument,
    add_games,
    exact_shapley,
    marginal_table,
    restrict,
)

DEFAULT_TOL = 1e-9


def check_efficiency(g: Game, a: Attribution) -> float:
    if a.d != g.d:
        raise InvalidArgument(f"attribution has {a.d} entries for a {g.d}-player game")
    return abs(float(np.sum(a.phi)) - float(g.values[g.grand]))


def find_null_players(g: Game, tol: float = DEFAULT_TOL) -> frozenset[int]:
    """Players whose marginal contribution is within ``tol`` of zero everywhere.

    This is the usual null condition C(S+i) = C(S) for all S.
    """
    if tol < 0:
        raise InvalidArgument("tol must be >= 0")
    return frozenset(i for i in range(g.d) if np.all(np.abs(marginal_table(g, i)) <= tol))


def _pair_gaps(g: Game, i: int, j: int) -> np.ndarray:
    """|C(S+i) - C(S+j)| for every S avoiding both i and j."""
    lo, hi = min(i, j), max(i, j)
    v = g.values.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    with_lo = v[:, 0, :, 1, :]
    with_hi = v[:, 1, :, 0, :]
    return np.abs(with_lo - with_hi)


def find_symmetric_pairs(g: Game, tol: float = DEFAULT_TOL) -> frozenset[tuple[int, int]]:
    if tol < 0:
        raise InvalidArgument("tol must be >= 0")
    return frozenset((i, j) for i, j in combinations(range(g.d), 2)
                     if np.all(_pair_gaps(g, i, j) <= tol))


def check_additivity(g: Game, h: Game) -> float:
    joint = exact_shapley(add_games(g, h)).phi
    return float(np.max(np.abs(joint - exact_shapley(g).phi - exact_shapley(h).phi)))


def _balanced_gaps(g: Game) -> dict[tuple[int, int], float]:
    phi = exact_shapley(g).phi
    # phi of the subgame without j, re-expanded to full player indexing
    sub = {}
    for j in range(g.d):
        p = exact_shapley(restrict(g, j)).phi
        sub[j] = np.insert(p, j, np.nan)
    return {(i, j): float(abs((phi[i] - sub[j][i]) - (phi[j] - sub[i][j])))
            for i, j in combinations(range(g.d), 2)}


def check_balanced_contributions(g: Game) -> float:
    if g.d < 2:
        raise InvalidArgument("balanced contributions needs at least two players")
    return max(_balanced_gaps(g).values())


@dataclass
class AxiomReport:
    efficiency_residual: float
    null_players: list[str]
    symmetric_pairs: list[tuple[str, str]]
    additivity_residual: float | None
    balanced_residual: float | None
    witnesses: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["symmetric_pairs"] = [list(p) for p in self.symmetric_pairs]
        return out


def audit_all(g: Game, h: Game | None = None, tol: float = DEFAULT_TOL) -> AxiomReport:
    a = exact_shapley(g)
    phi = a.phi
    eff = check_efficiency(g, a)
    nulls = find_null_players(g, tol)
    pairs = find_symmetric_pairs(g, tol)
    lab = g.labels
    witnesses: dict = {}

    scale = max(1.0, abs(float(g.values[g.grand])))
    if eff > tol * scale:
        witnesses["efficiency"] = {"sum_phi": float(phi.sum()), "grand_value": float(g.values[g.grand])}
    bad_null = [lab[i] for i in sorted(nulls) if abs(phi[i]) > g.d * tol]
    if bad_null:
        witnesses["null_player"] = bad_null
    bad_sym = [[lab[i], lab[j]] for i, j in sorted(pairs) if abs(phi[i] - phi[j]) > (1 << g.d) * tol]
    if bad_sym:
        witnesses["symmetry"] = bad_sym

    balanced = None
    if g.d >= 2:
        gaps = _balanced_gaps(g)
        worst = max(gaps, key=gaps.get)
        balanced = gaps[worst]
        if balanced > tol * scale:
            witnesses["balanced_contributions"] = {"pair": [lab[worst[0]], lab[worst[1]]], "gap": balanced}

    additivity = None
    if h is not None:
        additivity = check_additivity(g, h)
        if additivity > tol * scale:
            witnesses["additivity"] = {"residual": additivity}

    return AxiomReport(
        efficiency_residual=eff,
        null_players=[lab[i] for i in sorted(nulls)],
        symmetric_pairs=[(lab[i], lab[j]) for i, j in sorted(pairs)],
        additivity_residual=additivity,
        balanced_residual=balanced,
        witnesses=witnesses,
    )

