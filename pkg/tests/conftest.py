import numpy as np
import pytest

from pathlab import Convention, Grid, PhysicsConfig

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return Grid(1024, -16.0, 16.0)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(256, -8.0, 8.0)


@pytest.fixture(scope="session")
def pde():
    return PhysicsConfig(1.0, Convention.PDE)


@pytest.fixture(scope="session")
def ha():
    return PhysicsConfig(1.0, Convention.HA)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
