import pytest

from srbrw.core import ModelParams

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def params_small():
    return ModelParams(3, 1.0, 1.0)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
