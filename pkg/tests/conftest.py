import numpy as np
import pytest

_ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log():
    def record(line):
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
