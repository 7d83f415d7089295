import numpy as np
import pytest

from qbound import optimizer

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def catalog_results():
    """The full bound catalog, computed once per session."""
    return {r.name: r for r in optimizer.catalog()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_hermitian(rng, d, psd):
    """Unit-trace Hermitian matrix; PSD via Ginibre, otherwise with a negative eigenvalue."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if psd:
        h = g @ g.conj().T
    else:
        u, _ = np.linalg.qr(g)
        w = rng.uniform(0.05, 1.0, d)
        w[rng.integers(d)] = -rng.uniform(0.01, 0.5)
        h = (u * w) @ u.conj().T
    h = 0.5 * (h + h.conj().T)
    return h / np.trace(h).real


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
