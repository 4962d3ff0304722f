import numpy as np
import pytest

from tailtilt import distributions as D


@pytest.fixture(scope="session")
def loggamma_pair():
    """One draw of the log-gamma scenario: n=1000 against N=10^5."""
    x = D.sample(D.LogGamma(4, 0.45), 1000, D.SeedSpec(42, 0, 0))
    bg = D.sample(D.LogGamma(3, 0.45), 100_000, D.SeedSpec(42, 0, 1))
    return x, bg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion, in criterion order."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
