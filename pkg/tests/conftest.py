from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE: list[str] = []


class AcceptanceLog:
    """Collects one line per acceptance sub-check for the terminal summary."""

    def record(self, criterion: str, name: str, passed: bool, detail: str = "") -> bool:
        mark = "PASS" if passed else "FAIL"
        line = f"[{mark}] criterion {criterion}: {name}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
