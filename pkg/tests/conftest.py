import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from buckleopt import geometry as geo  # noqa: E402


@pytest.fixture
def unit_square():
    return geo.Rectangle((0.0, 0.0), 1.0, 1.0)


@pytest.fixture
def unit_disk():
    return geo.Disk((0.0, 0.0), 1.0)


@pytest.fixture
def l_shape():
    return geo.Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))


ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str) -> str:
    line = f"ACCEPTANCE {number:>2} {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
