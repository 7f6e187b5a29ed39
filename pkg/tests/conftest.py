import numpy as np
import pytest

from covtest import CovarianceModel, ObservationWindow


@pytest.fixture
def exp_model():
    return CovarianceModel.exponential(1.0, 1.0)


@pytest.fixture
def sqexp_model():
    return CovarianceModel.squared_exponential(1.0, 1.0)


@pytest.fixture
def small_window():
    return ObservationWindow(10.0, 1.0, 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20150129)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
