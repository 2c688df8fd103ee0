import csv
import json

import pytest

from shapaudit.cli import main
from shapaudit.toy_games import save_game, secret_holder_game, taxicab_game


@pytest.fixture
def taxicab_file(tmp_path):
    path = tmp_path / "taxicab.json"
    save_game(taxicab_game(), path)
    return str(path)


@pytest.fixture
def secret_file(tmp_path):
    path = tmp_path / "secret.json"
    save_game(secret_holder_game(), path)
    return str(path)


def test_shapley(taxicab_file, capsys):
    assert main(["shapley", "--game", taxicab_file]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split() for line in out[:3]] == [["1", "1"], ["2", "3"], ["3", "6"]]
    assert out[3].startswith("efficiency:") and out[3].endswith("ok")


def test_global_flags_either_side(taxicab_file, capsys):
    assert main(["--tol", "1e-6", "shapley", "--game", taxicab_file]) == 0
    assert main(["shapley", "--game", taxicab_file, "--tol", "1e-6"]) == 0


def test_axioms(taxicab_file, secret_file, capsys):
    assert main(["axioms", "--game", secret_file, "--with", taxicab_file]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["symmetric_pairs"] == [["2", "3"]]
    assert doc["additivity_residual"] <= 1e-9


def test_select(secret_file, capsys):
    assert main(["select", "--game", secret_file, "--top-k", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["selected"] == ["2", "3"] and doc["regret"] == 3.0
    assert main(["select", "--game", secret_file, "--threshold", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["selected"] == ["2", "3"]


def test_pathology(taxicab_file, capsys):
    assert main(["pathology", "--game", taxicab_file, "--k", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["taxicab_flags"] == ["1", "2"]
    assert doc["details"]["k"] == 1


def test_experiment_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["experiment", "secret", "--n", "500", "--seed", "3",
                 "--params", "t1=1", "t2=1.5", "--out", str(out)]) == 0
    (row,) = list(csv.DictReader(out.open()))
    assert (row["t1"], row["t2"], row["seed"], row["n"]) == ("1", "1.5", "3", "500")


def test_experiment_json_taxicab(tmp_path):
    out = tmp_path / "t.json"
    assert main(["experiment", "taxicab", "--n", "5000", "--params", "a=1,2,8",
                 "--out", str(out), "--format", "json"]) == 0
    (row,) = json.loads(out.read_text())
    assert row["a"] == "1 2 8" and row["seed"] == 42


def test_sweep(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["sweep", "secret", "--grid", "t1=-2:2:3,t2=-2:2:3", "--n", "200",
                 "--out", str(out), "--jobs", "1"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 9


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["select", "--game", "x.json"],
    ["select", "--game", "x.json", "--top-k", "1", "--threshold", "2"],
    ["experiment", "markov9", "--out", "o.csv"],
    ["experiment", "secret", "--params", "t1", "--out", "o.csv"],
    ["experiment", "secret", "--params", "t1=abc", "--out", "o.csv"],
    ["--seed", "x", "shapley", "--game", "g.json"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("shapaudit: usage error") and "\n" not in err


def test_validation_errors(tmp_path, taxicab_file, capsys):
    assert main(["shapley", "--game", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"players": ["a", "b"], "coalitions": [{"members": [], "value": 0}]}')
    assert main(["shapley", "--game", str(bad)]) == 2
    assert "missing coalition" in capsys.readouterr().err
    assert main(["select", "--game", taxicab_file, "--top-k", "7"]) == 2
    assert main(["sweep", "secret", "--grid", "t1=0:1:1,t2=0:1:2", "--out", str(tmp_path / "o")]) == 2
    assert main(["experiment", "markov2", "--params", "ell=1.5", "--n", "100",
                 "--out", str(tmp_path / "o")]) == 2


def test_numeric_failure(tmp_path, capsys):
    path = tmp_path / "huge.json"
    path.write_text(json.dumps({"players": ["a", "b"], "coalitions": [
        {"members": [], "value": 0.0}, {"members": ["a"], "value": 1e308},
        {"members": ["b"], "value": -1e308}, {"members": ["a", "b"], "value": 1e308}]}))
    assert main(["shapley", "--game", str(path)]) == 3
    assert capsys.readouterr().err.startswith("shapaudit: numeric failure")
