import numpy as np
import pytest

from chaoslab.dynamics import Params

# lines collected by the acceptance module, printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def base():
    return Params()


@pytest.fixture
def multistable():
    return Params(a8=1.2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
