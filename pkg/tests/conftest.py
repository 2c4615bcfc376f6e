import numpy as np
import pytest
from hypothesis import strategies as st

from aec.automata import Dfa
from aec.oracles import random_dfa
from aec.transforms import gen_Lbb

ALPHABETS = [("a",), ("a", "b"), ("a", "b", "c")]


@st.composite
def dfas(draw, max_states=6, max_symbols=2):
    k = draw(st.integers(1, max_symbols))
    n = draw(st.integers(1, max_states))
    alphabet = ALPHABETS[k - 1]
    table = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=k, max_size=k), min_size=n, max_size=n))
    accepting = draw(st.frozensets(st.integers(0, n - 1)))
    start = draw(st.integers(0, n - 1))
    return Dfa(alphabet, table, start, accepting)


def random_machines(count, max_states, max_symbols, seed):
    rng = np.random.default_rng(seed)
    return [
        random_dfa(rng, max_states, ALPHABETS[int(rng.integers(0, max_symbols))])
        for _ in range(count)
    ]


@pytest.fixture
def lbb():
    return gen_Lbb()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
