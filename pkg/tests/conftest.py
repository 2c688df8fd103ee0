import numpy as np
import pytest
from hypothesis import strategies as st

from shapaudit.game import Game

_criteria: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _criteria[name] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split()[0].lstrip("AC"))):
        ok, detail = _criteria[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def random_game(rng: np.random.Generator, d: int, monotone: bool = False) -> Game:
    if monotone:
        # cumulative max over subsets of nonnegative increments
        raw = rng.uniform(0, 1, 1 << d)
        raw[0] = 0.0
        for i in range(d):
            v = raw.reshape(-1, 2, 1 << i)
            v[:, 1, :] += v[:, 0, :]
        return Game.from_values(raw, tag="random_monotone")
    return Game.from_values(rng.normal(0, 10, 1 << d), tag="random")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def games(draw, min_d=1, max_d=6):
    d = draw(st.integers(min_d, max_d))
    vals = draw(st.lists(st.floats(-100, 100, allow_nan=False, allow_infinity=False),
                         min_size=1 << d, max_size=1 << d))
    return Game.from_values(vals, tag="hyp")
