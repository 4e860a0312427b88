import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from openness.grid import OccupancyGrid  # noqa: E402


def random_grid(rng: np.random.Generator, max_side: int = 14, max_density: float = 0.30) -> OccupancyGrid:
    rows = int(rng.integers(1, max_side + 1))
    cols = int(rng.integers(1, max_side + 1))
    density = rng.uniform(0.0, max_density)
    blocked = rng.random((rows, cols)) < density
    if blocked.all():
        blocked[0, 0] = False
    return OccupancyGrid(blocked, ~blocked)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def record(criterion: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else ""))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
