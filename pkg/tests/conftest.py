import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stochburgers.spectral import DIRICHLET, NEUMANN, Domain, build_basis

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def neumann_unit():
    return build_basis(Domain(1.0, NEUMANN, 1.0), 128)


@pytest.fixture(scope="session")
def dirichlet_unit():
    return build_basis(Domain(1.0, DIRICHLET, 1.0), 64)


def simpson_weights(n: int, a: float, b: float) -> np.ndarray:
    """Composite Simpson weights on ``n`` (odd) equispaced points."""
    assert n % 2 == 1
    w = np.ones(n)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w * (b - a) / (3 * (n - 1))


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, summary: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {number}: {summary}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
