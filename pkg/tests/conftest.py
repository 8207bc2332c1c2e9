import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from levylab.spectral import TorusGrid

settings.register_profile(
    "levylab", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("levylab")


@pytest.fixture(scope="session")
def grid1():
    return TorusGrid(1, 40.0, 1024)


@pytest.fixture(scope="session")
def small_grid():
    return TorusGrid(1, 40.0, 256)


@pytest.fixture
def gaussian(grid1):
    x = grid1.axis()
    return grid1.field(np.exp(-0.5 * x**2))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
