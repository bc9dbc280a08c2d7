import os
import sys

os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
sys.path.insert(0, os.path.dirname(__file__))

import pytest  # noqa: E402

_REPORT = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed at the end of the run."""

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _REPORT.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
