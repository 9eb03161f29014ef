import numpy as np
import pytest

from oscbath.model import CompositeModel

# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def random_kappa(rng, d, dense=True, scale=1.0):
    kap = np.zeros((d, d))
    if dense:
        upper = rng.uniform(0.2, 1.0, size=(d, d)) * scale
        kap = np.triu(upper, 1)
        kap = kap + kap.T
    np.fill_diagonal(kap, rng.uniform(0.5, 1.5, size=d) * scale)
    return kap


def random_model(rng, d, N, dense=True, g_scale=None, star=None):
    """Unit-scale model: masses, wall springs and frequencies of order one."""
    masses = rng.uniform(0.5, 2.0, size=d)
    nu = rng.uniform(0.2, 1.0, size=N)
    g = rng.uniform(0.2, 1.0, size=N) / np.sqrt(N) if g_scale is None else np.full(N, g_scale)
    star = int(rng.integers(d)) if star is None else star
    return CompositeModel.from_arrays(masses, random_kappa(rng, d, dense), nu, g, star_index=star)


def random_phase(rng, model):
    from oscbath.dynamics import PhaseState

    return PhaseState(
        0.0,
        rng.normal(size=model.d),
        rng.normal(size=model.d),
        rng.normal(size=model.N),
        rng.normal(size=model.N),
    )


def unit_model(N=1, g=0.0, nu=1.0):
    """Single unit oscillator (m = kappa = 1) with ``N`` identical bath modes."""
    return CompositeModel.from_arrays([1.0], [[1.0]], np.full(N, nu), np.full(N, g))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
