import numpy as np
import pytest

from envindex.curve import ErrorCurve


def random_curve(rng, K, convex=False, zero_after=None):
    """Exactly monotone normalized curve built from non-negative drops."""
    drops = rng.exponential(size=K) * (rng.random(K) < 0.8)
    if zero_after is not None:
        drops = rng.exponential(size=K) + 1e-3
        drops[zero_after:] = 0.0
    if convex:
        drops = np.sort(drops)[::-1]
    tail = np.cumsum(drops[::-1])[::-1]
    return ErrorCurve(np.append(tail, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20241014)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
