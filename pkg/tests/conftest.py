import numpy as np
import pytest

from specshift.herm import random_hermitian


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pair_of(rng, n, scale_v=0.7):
    return random_hermitian(n, rng, 1.0), random_hermitian(n, rng, scale_v)


def rel(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
