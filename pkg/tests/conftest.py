import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fermibox import boundary, potentials  # noqa: E402


@pytest.fixture
def well():
    return potentials.square_well(-2.0, -1.0, 1.0)


@pytest.fixture
def barrier():
    return potentials.square_well(2.0, -1.0, 1.0)


@pytest.fixture
def dirichlet():
    return boundary.dirichlet()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
