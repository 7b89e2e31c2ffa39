import numpy as np
import pytest

from reebcurves.models import get_model

SUMMARY_LINES = []


@pytest.fixture(scope="session")
def r3():
    return get_model("r3")


@pytest.fixture(scope="session")
def r5():
    return get_model("r5")


@pytest.fixture(scope="session")
def s3():
    return get_model("s3")


@pytest.fixture(scope="session")
def flat():
    return get_model("flat-control")


@pytest.fixture(scope="session")
def s3_chart():
    return get_model("s3-chart")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if SUMMARY_LINES:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY_LINES:
            terminalreporter.write_line(line)
