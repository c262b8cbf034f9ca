import numpy as np
import pytest

from mvicad import ModelParams, ViewSet


def random_instance(rng, m=3, p=2, n=64, tau_max=5, density="logcosh",
                    sigma=1.0):
    """Random views, well-conditioned W near identity and random delays."""
    X = rng.standard_normal((m, p, n))
    W = np.eye(p) + 0.3 * rng.standard_normal((m, p, p))
    tau = rng.integers(-tau_max, tau_max + 1, size=(m, p))
    return ModelParams(W, tau, sigma=sigma, density=density), ViewSet(X)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
