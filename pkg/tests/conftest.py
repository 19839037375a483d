import math

import numpy as np
import pytest

ACCEPTANCE = []


def record(number, title, ok, detail=""):
    ACCEPTANCE.append((number, title, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE):
        line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


PHI_GRID = np.linspace(0, 2 * math.pi, 181)
THETA_GRID = np.linspace(0, math.pi / 4, 46)
