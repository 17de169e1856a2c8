"""Shared fixtures and the acceptance-criteria terminal summary."""

import numpy as np
import pytest

#: One line per acceptance criterion, echoed after the test run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    """Record one acceptance line, print it, and assert the verdict."""

    def _record(cid: str, name: str, ok: bool, detail: str = ""):
        line = f"[acceptance] {cid} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
