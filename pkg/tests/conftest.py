import numpy as np
import pytest

from svcgrid.data import DataMatrix
from svcgrid.datasets import load_iris

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


@pytest.fixture(scope="session")
def iris():
    return load_iris()


def two_blobs(seed, n=40, spread=0.5, distance=10.0):
    """Two isotropic Gaussian blobs; tags 1 and 2 give the true blob."""
    rng = np.random.default_rng(seed)
    angle = rng.uniform(0, 2 * np.pi)
    centre = distance * np.array([np.cos(angle), np.sin(angle)])
    X = np.vstack([rng.normal(scale=spread, size=(n, 2)), centre + rng.normal(scale=spread, size=(n, 2))])
    y = np.r_[np.ones(n, int), np.full(n, 2)]
    names = tuple(f"{t} p{i + 1}" for i, t in enumerate(y))
    return DataMatrix.from_rows(X, names, ("x", "y")), y
