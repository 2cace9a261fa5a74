import numpy as np
import pytest

from artifact import zeros


@pytest.fixture(scope="session")
def table():
    """First 10^4 zero ordinates, built once per session."""
    return zeros.compute_zeros(10_000)


@pytest.fixture(scope="session")
def small_table(table):
    return table.head(2000)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
