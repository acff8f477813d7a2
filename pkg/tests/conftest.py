import sys
from pathlib import Path

import pytest

from fractal_forms import catalog

TOOLS = Path(__file__).resolve().parents[1] / "tools"
sys.path.insert(0, str(TOOLS))


@pytest.fixture
def gasket():
    return catalog.gasket_schema()


@pytest.fixture
def fractalina():
    return catalog.fractalina_schema()


@pytest.fixture
def pillow():
    return catalog.pillow_schema()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
