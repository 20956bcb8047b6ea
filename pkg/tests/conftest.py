import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


def bump(c=0.0, w=1.0):
    """C-infinity bump supported on (c - w, c + w)."""
    def f(x):
        u = (np.asarray(x, dtype=float) - c) / w
        return np.where(np.abs(u) < 1, np.exp(-1.0 / np.maximum(1.0 - u * u, 1e-300)), 0.0)
    return f


def gauss(c=0.0, s=1.0):
    return lambda x: np.exp(-((np.asarray(x, dtype=float) - c) ** 2) / (2 * s * s))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
