import numpy as np
import pytest

from schlesinger.fuchsian import INF, random_sl2_system

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one test per acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def report(number, title, ok, detail):
    """Record and print one PASS/FAIL line, then assert."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def spectrum_distance(B, lam):
    """Distance between the eigenvalues of ``B`` and the pair ``(lam, tr B - lam)``."""
    w = np.linalg.eigvals(B)
    mu = np.trace(B) - lam
    return min(max(abs(w[0] - lam), abs(w[1] - mu)), max(abs(w[1] - lam), abs(w[0] - mu)))


def chart_system(seed=3):
    """A well-conditioned system with poles ``0, 1, 0.3, inf``."""
    r = np.random.default_rng(seed)
    lam = [0.21 + 0.05j, 0.33 - 0.04j, 0.17 + 0.02j, 0.29 + 0.03j]
    return random_sl2_system(r, lam, poles=[0, 1, 0.3, INF])
