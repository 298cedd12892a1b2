import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rsrepair.fields import get_tower
from rsrepair.rscode import full_length_code

settings.register_profile("repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def gf4():
    return get_tower(2, 2)


@pytest.fixture(scope="session")
def gf16():
    return get_tower(2, 4)


@pytest.fixture(scope="session")
def gf256():
    return get_tower(2, 8)


@pytest.fixture(scope="session")
def code16(gf16):
    return full_length_code(gf16)


@pytest.fixture(scope="session")
def code256(gf256):
    return full_length_code(gf256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
