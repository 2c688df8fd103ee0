"""Closed-form toy games and the JSON game file format.

A game file looks like::

    {"players": ["1", "2", "3"],
     "coalitions": [{"members": [], "value": 0.0},
                    {"members": ["1"], "value": 3.0}, ...]}

Members are referenced by name, so entry order is irrelevant.  Every one of
the ``2**d`` coalitions must appear exactly once.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .game import MAX_PLAYERS, CapacityError, Game, ValidationError, members

GAME_FILE_KEYS = {"players", "coalitions"}


def taxicab_game() -> Game:
    def worth(S: int) -> float:
        if S & 0b100:
            return 10.0
        if S & 0b010:
            return 7.0
        if S & 0b001:
            return 3.0
        return 0.0

    return Game.from_function(worth, 3, tag="taxicab")


def secret_holder_game() -> Game:
    # player 1 (bit 0) is worthless alone but lifts any partner to the maximum
    table = {
        0b000: 0.0, 0b001: 0.0, 0b010: 7.0, 0b100: 7.0,
        0b011: 10.0, 0b101: 10.0, 0b110: 7.0, 0b111: 10.0,
    }
    return Game.from_function(table.__getitem__, 3, tag="secret_holder")


def unanimity_game(d: int = 2) -> Game:
    full = (1 << d) - 1
    return Game.from_function(lambda S: float(S == full), d, tag="unanimity")


def with_dummy(g: Game, label: str | None = None) -> Game:
    """Append a player that adds nothing to any coalition."""
    if g.d >= MAX_PLAYERS:
        raise CapacityError(f"cannot grow a {g.d}-player game past {MAX_PLAYERS}")
    label = label or str(g.d + 1)
    raw = None if g.raw is None else np.concatenate([g.raw, g.raw])
    values = np.concatenate([g.values, g.values])
    return Game(g.d + 1, g.labels + (label,), values, g.offset, f"{g.tag}+dummy", raw)


def game_to_dict(g: Game) -> dict:
    raw = g.raw_values
    return {
        "players": list(g.labels),
        "coalitions": [
            {"members": [g.labels[i] for i in members(S, g.d)], "value": float(raw[S])}
            for S in range(1 << g.d)
        ],
    }


def game_from_dict(doc: dict, tag: str = "file") -> Game:
    if not isinstance(doc, dict):
        raise ValidationError("game file must contain a JSON object")
    unknown = set(doc) - GAME_FILE_KEYS
    if unknown:
        raise ValidationError(f"unknown top-level keys: {sorted(unknown)}")
    missing_keys = GAME_FILE_KEYS - set(doc)
    if missing_keys:
        raise ValidationError(f"missing top-level keys: {sorted(missing_keys)}")

    players = doc["players"]
    if not isinstance(players, list) or not players or not all(isinstance(p, str) and p for p in players):
        raise ValidationError("players must be a non-empty list of names")
    if len(set(players)) != len(players):
        raise ValidationError("duplicate player names")
    d = len(players)
    if d > MAX_PLAYERS:
        raise ValidationError(f"{d} players exceeds the limit of {MAX_PLAYERS}")
    index = {p: i for i, p in enumerate(players)}

    raw = np.full(1 << d, np.nan)
    seen = np.zeros(1 << d, dtype=bool)
    for entry in doc["coalitions"]:
        names = entry.get("members") if isinstance(entry, dict) else None
        if not isinstance(names, list):
            raise ValidationError(f"malformed coalition entry: {entry!r}")
        label = "{" + ",".join(map(str, names)) + "}"
        S = 0
        for name in names:
            if name not in index:
                raise ValidationError(f"unknown member {name!r} in coalition {label}")
            if S >> index[name] & 1:
                raise ValidationError(f"player {name!r} listed twice in coalition {label}")
            S |= 1 << index[name]
        if seen[S]:
            raise ValidationError(f"duplicate coalition {label}")
        value = entry.get("value")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"non-finite or non-numeric value for coalition {label}")
        raw[S] = float(value)
        seen[S] = True

    if not seen.all():
        S = int(np.flatnonzero(~seen)[0])
        label = "{" + ",".join(players[i] for i in members(S, d)) + "}"
        raise ValidationError(f"missing coalition {label}")
    return Game.from_values(raw, players, tag=tag)


def save_game(g: Game, path) -> None:
    # json writes floats via repr, the shortest string that round-trips binary64
    Path(path).write_text(json.dumps(game_to_dict(g), indent=1) + "\n", encoding="utf-8")


def load_game(path) -> Game:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return game_from_dict(doc, tag=path.stem)


BUILTIN_GAMES = {
    "taxicab": taxicab_game,
    "secret_holder": secret_holder_game,
    "unanimity": unanimity_game,
}
