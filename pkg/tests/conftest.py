from importlib import resources

import pytest
from hypothesis import settings, strategies as st

from probkg.graph import load_graph
from probkg.query import load_query

settings.register_profile("default", deadline=None)
settings.load_profile("default")

DATA = resources.files("probkg") / "data"

FIG_PROBS = {1: 0.8, 2: 0.7, 3: 0.6, 4: 0.8, 5: 0.6, 6: 0.2}


@pytest.fixture
def flights():
    return load_graph(DATA / "flights.tsv")


@pytest.fixture
def flights_full():
    return load_graph(DATA / "flights_full.tsv")


@pytest.fixture
def one_stop():
    return load_query(DATA / "one_stop.rq")


@pytest.fixture
def one_stop_threshold():
    return load_query(DATA / "one_stop_threshold.rq")


# derivation lists over a small variable pool, the generated set of the semiring
conjuncts = st.frozensets(st.integers(1, 8), min_size=1, max_size=4)
derivation_lists = st.lists(conjuncts, min_size=1, max_size=6)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
