"""End-to-end simulation experiments, parameter sweeps and their CSV/JSON reports.

Each ``run_*`` function returns a list of report rows (plain dicts) whose keys
are exactly the experiment's column list.  Sweeps derive one seed per grid
cell as ``mix64(base_seed, i[, j])`` and emit rows in grid order, so the
number of worker processes never changes the output.
"""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dgp, value_functions as vf
from .axioms import check_efficiency
from .game import Attribution, Game, InvalidArgument, exact_shapley, members
from .selection import (
    detect_taxicab,
    fig3_predicate,
    markov_rank_check,
    selection_regret,
    top_k,
)

DEFAULT_SEED = 42
DEFAULT_N = {"markov1": 10**6, "markov2": 10**6, "secret": 1000, "taxicab": 10**5}
DEFAULT_TAXICAB_A = (5.0, 10.0, 20.0)

LATTICE3 = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]


def _cname(S: int) -> str:
    return "C_" + "".join(str(i + 1) for i in members(S, 3))


C_COLUMNS = [_cname(S) for S in LATTICE3]

COLUMNS = {
    "markov1": ["experiment", "formulation", "n", "seed",
                "phi_X1", "phi_X2", "phi_X3", "phi_Z",
                "top3", "violation", "efficiency_residual"],
    "markov2": ["experiment", "formulation", "ell", "n", "seed",
                "phi_X1", "phi_X2", "phi_X3", "phi1_minus_phi2", "phi1_minus_phi3",
                "violation", "efficiency_residual", *C_COLUMNS],
    "secret": ["experiment", "formulation", "t1", "t2", "n", "seed",
               "phi_X1", "phi_X2", "phi_X3", "phi1_minus_phi2", "phi1_minus_phi3",
               "pathology", "efficiency_residual", *C_COLUMNS],
    "taxicab": ["experiment", "formulation", "a", "n", "seed",
                "phi_X1", "phi_X2", "phi_X3", "taxicab_flags", "regret_k1",
                "efficiency_residual", *C_COLUMNS],
}


def _phi_cols(a: Attribution) -> dict:
    return {f"phi_{k}": v for k, v in a.as_dict().items()}


def _game_cols(g: Game) -> dict:
    if g.d != 3:
        return {}
    return {_cname(S): float(g.values[S]) for S in LATTICE3}


# ---- Gauss-Markov (Markov boundary {X1, X2, X3}, redundant Z) ----

def run_markov1(n: int = DEFAULT_N["markov1"], seed: int = DEFAULT_SEED) -> list[dict]:
    if n < 10**4:
        raise InvalidArgument("markov1 needs n >= 10^4")
    data = dgp.sample_gauss_markov(n, seed)
    boundary = [data.names.index(x) for x in ("X1", "X2", "X3")]
    model = vf.fit_linear(data)

    games = {
        "r2_population": vf.r2_game_population(dgp.population_gauss_markov()),
        "r2_empirical": vf.r2_game_empirical(data),
        "interventional_linear": vf.interventional_loss_game(model, data, vf.SQUARED_ERROR),
    }
    rows = []
    for name, g in games.items():
        a = exact_shapley(g)
        rows.append(_markov1_row(name, n, seed, a, g))
    shap = Attribution(vf.mean_abs_linear_shap(model, data), "mean_abs_linear_shap",
                       "closed_form", data.names)
    rows.append(_markov1_row("mean_abs_linear_shap", n, seed, shap, None))
    for row in rows:
        row["violation"] = int(markov_rank_check(row.pop("_attr"), boundary))
    return rows


def _markov1_row(name, n, seed, a: Attribution, g: Game | None) -> dict:
    chosen = top_k(a, 3)
    return {
        "experiment": "markov1", "formulation": name, "n": n, "seed": seed,
        **_phi_cols(a),
        "top3": " ".join(chosen.names(a.labels)),
        "violation": None,
        "efficiency_residual": None if g is None else check_efficiency(g, a),
        "_attr": a,
    }


# ---- discrete Markov (boundary {X2, X3}, redundant X1) ----

MARKOV2_FORMULATIONS = ("bayes_accuracy_exact", "interventional_table_crossentropy")


def markov2_game(formulation: str, ell: float, n: int, seed: int) -> Game:
    if formulation == "bayes_accuracy_exact":
        return vf.bayes_accuracy_game(dgp.joint_discrete_markov(ell))
    if formulation == "interventional_table_crossentropy":
        data = dgp.sample_discrete_markov(ell, n, seed)
        return vf.interventional_loss_game(vf.fit_prob_table(data), data, vf.CROSS_ENTROPY)
    raise InvalidArgument(f"unknown markov2 formulation {formulation!r}")


def run_markov2(ell: float = 0.05, n: int = DEFAULT_N["markov2"], seed: int = DEFAULT_SEED,
                formulations: Sequence[str] = MARKOV2_FORMULATIONS) -> list[dict]:
    rows = []
    for name in formulations:
        g = markov2_game(name, ell, n, seed)
        a = exact_shapley(g)
        phi = a.phi
        rows.append({
            "experiment": "markov2", "formulation": name, "ell": ell,
            "n": 0 if name == "bayes_accuracy_exact" else n, "seed": seed,
            **_phi_cols(a),
            "phi1_minus_phi2": float(phi[0] - phi[1]),
            "phi1_minus_phi3": float(phi[0] - phi[2]),
            "violation": int(markov_rank_check(a, [1, 2])),
            "efficiency_residual": check_efficiency(g, a),
            **_game_cols(g),
        })
    return rows


# ---- secret holder (Y = t1 (X2+X3) + t2 (X1X2 + X1X3) + eps) ----

def run_secret(t1: float, t2: float, n: int = DEFAULT_N["secret"], seed: int = DEFAULT_SEED) -> list[dict]:
    if n < 100:
        raise InvalidArgument("secret experiment needs n >= 100")
    data = dgp.sample_secret(t1, t2, n, seed)
    g = vf.loglik_game(data, dgp.SecretInteraction(t1, t2))
    a = exact_shapley(g)
    return [{
        "experiment": "secret", "formulation": "loglik", "t1": t1, "t2": t2, "n": n, "seed": seed,
        **_phi_cols(a),
        "phi1_minus_phi2": float(a.phi[0] - a.phi[1]),
        "phi1_minus_phi3": float(a.phi[0] - a.phi[2]),
        "pathology": int(fig3_predicate(g, a)),
        "efficiency_residual": check_efficiency(g, a),
        **_game_cols(g),
    }]


# ---- taxicab max ----

def run_taxicab(a: Sequence[float] = DEFAULT_TAXICAB_A, n: int = DEFAULT_N["taxicab"],
                seed: int = DEFAULT_SEED) -> list[dict]:
    data = dgp.sample_taxicab_max(a, n, seed)
    g = vf.mse_skill_game(data)
    attr = exact_shapley(g)
    flags = detect_taxicab(g, attr)
    return [{
        "experiment": "taxicab", "formulation": "mse_skill",
        "a": " ".join(f"{x:g}" for x in a), "n": n, "seed": seed,
        **_phi_cols(attr),
        "taxicab_flags": " ".join(g.labels[i] for i in sorted(flags)),
        "regret_k1": selection_regret(g, 1),
        "efficiency_residual": check_efficiency(g, attr),
        **_game_cols(g),
    }]


# ---- sweeps ----

@dataclass(frozen=True)
class GridAxis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise InvalidArgument(f"axis {self.name}: count must be >= 2")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise InvalidArgument(f"axis {self.name}: bounds must be finite")

    def values(self) -> list[float]:
        # start + span * i / (count - 1) hits exact endpoints and exact zero on symmetric grids
        span = self.stop - self.start
        return [self.start + span * i / (self.count - 1) for i in range(self.count)]


def parse_grid(spec: str) -> list[GridAxis]:
    """Parse ``name=start:stop:count[,name=start:stop:count...]``."""
    axes = []
    for part in filter(None, (p.strip() for p in spec.split(","))):
        try:
            name, rng = part.split("=", 1)
            start, stop, count = rng.split(":")
            axes.append(GridAxis(name.strip(), float(start), float(stop), int(count)))
        except ValueError:
            raise InvalidArgument(f"bad grid axis {part!r}; expected name=start:stop:count") from None
    if not axes:
        raise InvalidArgument("empty grid spec")
    return axes


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    grid: tuple[GridAxis, ...]
    base_seed: int = DEFAULT_SEED
    n: int | None = None
    formulations: tuple[str, ...] = field(default=MARKOV2_FORMULATIONS)

    def __post_init__(self):
        expected = {"markov2": ["ell"], "secret": ["t1", "t2"]}.get(self.experiment)
        if expected is None:
            raise InvalidArgument(f"no sweep defined for {self.experiment!r}")
        if [ax.name for ax in self.grid] != expected:
            raise InvalidArgument(f"{self.experiment} sweep needs axes {expected}")

    @property
    def cell_n(self) -> int:
        return self.n or DEFAULT_N[self.experiment]


def _markov2_cell(args) -> list[dict]:
    i, ell, n, base_seed, formulations = args
    return run_markov2(ell, n, dgp.mix64(base_seed, i), formulations)


def _secret_cell(args) -> list[dict]:
    i, j, t1, t2, n, base_seed = args
    return run_secret(t1, t2, n, dgp.mix64(base_seed, i, j))


def _run_cells(fn: Callable, cells: list, jobs: int) -> list[dict]:
    if jobs <= 1:
        results = map(fn, cells)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fn, cells, chunksize=max(1, len(cells) // (8 * jobs))))
    return [row for rows in results for row in rows]


def sweep_markov2(cfg: SweepConfig, jobs: int = 1) -> list[dict]:
    (axis,) = cfg.grid
    cells = [(i, ell, cfg.cell_n, cfg.base_seed, tuple(cfg.formulations))
             for i, ell in enumerate(axis.values())]
    return _run_cells(_markov2_cell, cells, jobs)


def sweep_secret(cfg: SweepConfig, jobs: int = 1) -> list[dict]:
    ax1, ax2 = cfg.grid
    cells = [(i, j, t1, t2, cfg.cell_n, cfg.base_seed)
             for i, t1 in enumerate(ax1.values())
             for j, t2 in enumerate(ax2.values())]
    return _run_cells(_secret_cell, cells, jobs)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[dict]:
    return {"markov2": sweep_markov2, "secret": sweep_secret}[cfg.experiment](cfg, jobs)


def default_jobs() -> int:
    return int(os.environ.get("SHAPAUDIT_JOBS", "1"))


# ---- report writers ----

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def rows_to_json(rows: list[dict], columns: Sequence[str]) -> str:
    return json.dumps([{c: _json_value(row.get(c)) for c in columns} for row in rows], indent=1) + "\n"


def write_rows(rows: list[dict], experiment: str, path, fmt: str = "csv") -> None:
    columns = COLUMNS[experiment]
    text = rows_to_csv(rows, columns) if fmt == "csv" else rows_to_json(rows, columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
