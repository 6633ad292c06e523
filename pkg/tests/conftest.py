import numpy as np
import pytest

from foragesim.grid import Grid

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(label, passed, detail)``."""

    def record(label, passed, detail=""):
        _criteria.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")


@pytest.fixture
def unit_1d():
    return Grid.unit(16)


@pytest.fixture
def unit_2d():
    return Grid.unit(16, 16)


def cosine_mode(grid, k=1):
    x = grid.mesh()[0]
    return np.cos(k * np.pi * x / grid.extent[0])
