import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""
    def report(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
