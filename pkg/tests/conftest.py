import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from grandlab.gf2_codes import BchSpec, bch_construct, hamming74

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CRITERIA_LINES: list = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    CRITERIA_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hamming():
    return hamming74()


@pytest.fixture(scope="session")
def bch15():
    return bch_construct(BchSpec(4, 1))


@pytest.fixture(scope="session")
def bch127():
    return bch_construct(BchSpec(7, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
