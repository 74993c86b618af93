from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import settings

from schedflow.network import Network
from schedflow.scheduling import make_standard_cost

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def two_route_network() -> Network:
    return Network.build(
        ["s", "a", "t"],
        [("e", "s", "a", 2, 0), ("f", "a", "t", 2, 1), ("g", "a", "t", 1, 0)],
        "s",
        "t",
    )


def single_arc(capacity=1, delay=0) -> Network:
    return Network.build(["s", "t"], [("a", "s", "t", capacity, delay)], "s", "t")


@pytest.fixture
def two_route():
    return two_route_network()


@pytest.fixture
def std_cost():
    return make_standard_cost(1, F(1, 2), 2)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
