import random

import pytest

from ultracoarse.cardinal import CardinalSeq
from ultracoarse.space import FiniteUltraSpace, group_chain_space, truncate

ACCEPTANCE_LINES: list[str] = []


def q4():
    return FiniteUltraSpace(list("abcd"), [[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 1], [2, 2, 1, 0]])


def cube3():
    return truncate(group_chain_space(CardinalSeq.constant(2)), 3, 2)


@pytest.fixture
def Q4():
    return q4()


@pytest.fixture
def C3():
    return cube3()


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
