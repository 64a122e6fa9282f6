from fractions import Fraction

import pytest
from hypothesis import strategies as st

from rational_dialogues.model import Framework, Partition

F = Fraction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def frameworks(draw, max_states=6, max_den=6):
    n = draw(st.integers(1, max_states))
    mass = tuple(F(draw(st.integers(1, max_den)), draw(st.integers(1, max_den))) for _ in range(n))
    event = frozenset(draw(st.sets(st.integers(0, n - 1))))
    p = Partition.from_labels(draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
    q = Partition.from_labels(draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
    opener = draw(st.sampled_from("pq"))
    return Framework(tuple(f"s{i}" for i in range(n)), mass, event, p, q, opener)


@pytest.fixture
def example():
    from rational_dialogues.matrix_io import load_fixture, matrix_to_framework
    return matrix_to_framework(load_fixture("example-5x5"))


@pytest.fixture
def didactic():
    from rational_dialogues.matrix_io import load_fixture, matrix_to_framework
    return matrix_to_framework(load_fixture("didactic-5x5"))
