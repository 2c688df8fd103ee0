"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 validation/data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex
from .axioms import audit_all, check_efficiency
from .game import InvalidArgument, NumericError, ValidationError, exact_shapley
from .selection import pathology_report, threshold, top_k
from .toy_games import load_game


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # shared by the top-level parser and every subcommand so flags work on either side
    p = argparse.ArgumentParser(add_help=False)
    suppress = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=ex.DEFAULT_SEED if defaults else suppress,
                   help="base random seed (default 42)")
    p.add_argument("--tol", type=float, default=1e-9 if defaults else suppress,
                   help="numeric tolerance (default 1e-9)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shapaudit", parents=[_global_flags(True)],
                     description="Exact Shapley values, axiom audits and feature-selection pathologies.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = [_global_flags(False)]

    p = sub.add_parser("shapley", parents=common, help="exact Shapley values of a game file")
    p.add_argument("--game", required=True)

    p = sub.add_parser("axioms", parents=common, help="audit the Shapley axioms on a game file")
    p.add_argument("--game", required=True)
    p.add_argument("--with", dest="other", help="second game for the additivity check")

    p = sub.add_parser("select", parents=common, help="Shapley-ranked feature selection")
    p.add_argument("--game", required=True)
    rule = p.add_mutually_exclusive_group(required=True)
    rule.add_argument("--top-k", type=int)
    rule.add_argument("--threshold", type=float)

    p = sub.add_parser("pathology", parents=common, help="run the selection pathology detectors")
    p.add_argument("--game", required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("experiment", parents=common, help="run one simulation experiment")
    p.add_argument("name", choices=["markov1", "markov2", "secret", "taxicab"])
    p.add_argument("--n", type=int)
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE",
                   help="ell=0.05 | t1=2 t2=2.2 | a=5,10,20")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("sweep", parents=common, help="parameter sweep over a grid")
    p.add_argument("name", choices=["markov2", "secret"])
    p.add_argument("--grid", required=True, help="name=start:stop:count[,name=...]")
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default $SHAPAUDIT_JOBS or 1)")
    return parser


def _params(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--params entries must be KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _float(params: dict, key: str, default: float | None = None) -> float:
    if key not in params:
        if default is None:
            raise UsageError(f"missing parameter {key}")
        return default
    try:
        return float(params[key])
    except ValueError:
        raise UsageError(f"parameter {key} must be a number") from None


def _cmd_shapley(args):
    g = load_game(args.game)
    a = exact_shapley(g)
    width = max(len(x) for x in g.labels)
    for label, v in a.as_dict().items():
        print(f"{label:>{width}}  {v:.12g}")
    res = check_efficiency(g, a)
    status = "ok" if res <= args.tol * max(1.0, abs(g(g.grand))) else "FAILED"
    print(f"efficiency: sum(phi)={a.phi.sum():.12g} C(F)={g(g.grand):.12g} residual={res:.3g} {status}")


def _cmd_axioms(args):
    g = load_game(args.game)
    h = load_game(args.other) if args.other else None
    print(json.dumps(audit_all(g, h, tol=args.tol).to_dict(), indent=1))


def _cmd_select(args):
    g = load_game(args.game)
    a = exact_shapley(g)
    res = top_k(a, args.top_k, g) if args.top_k is not None else threshold(a, args.threshold, g)
    print(json.dumps({"rule": res.rule, "param": res.param, "selected": res.names(g.labels),
                      "value": g(res.selected), "regret": res.regret}, indent=1))


def _cmd_pathology(args):
    g = load_game(args.game)
    print(json.dumps(pathology_report(g, k=args.k, tol=args.tol).to_dict(), indent=1))


def _cmd_experiment(args):
    params = _params(args.params)
    n = args.n or ex.DEFAULT_N[args.name]
    if args.name == "markov1":
        rows = ex.run_markov1(n, args.seed)
    elif args.name == "markov2":
        rows = ex.run_markov2(_float(params, "ell", 0.05), n, args.seed)
    elif args.name == "secret":
        rows = ex.run_secret(_float(params, "t1", 2.0), _float(params, "t2", 2.2), n, args.seed)
    else:
        a = ex.DEFAULT_TAXICAB_A
        if "a" in params:
            try:
                a = tuple(float(x) for x in params["a"].split(","))
            except ValueError:
                raise UsageError("a must be a comma-separated list of numbers") from None
        rows = ex.run_taxicab(a, n, args.seed)
    ex.write_rows(rows, args.name, args.out, args.format)


def _cmd_sweep(args):
    cfg = ex.SweepConfig(args.name, tuple(ex.parse_grid(args.grid)), args.seed, args.n)
    jobs = args.jobs if args.jobs is not None else ex.default_jobs()
    rows = ex.run_sweep(cfg, jobs)
    ex.write_rows(rows, args.name, args.out, args.format)


COMMANDS = {
    "shapley": _cmd_shapley,
    "axioms": _cmd_axioms,
    "select": _cmd_select,
    "pathology": _cmd_pathology,
    "experiment": _cmd_experiment,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"shapaudit: usage error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, InvalidArgument, FileNotFoundError) as exc:
        print(f"shapaudit: error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, ArithmeticError) as exc:
        print(f"shapaudit: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
