import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_kappa, random_model, unit_model
from oscbath.model import (
    BathSpec,
    CompositeModel,
    ModelError,
    SystemSpec,
    build_spring_matrix,
    principal_sqrt,
)


def spring_energy(kappa, x):
    # wall springs plus one spring per unordered pair of masses
    d = len(x)
    e = 0.5 * sum(kappa[i, i] * x[i] ** 2 for i in range(d))
    for i in range(d):
        for j in range(i + 1, d):
            e += 0.5 * kappa[i, j] * (x[i] - x[j]) ** 2
    return e


def test_spring_matrix_two_masses():
    K = build_spring_matrix(SystemSpec([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]]))
    np.testing.assert_array_equal(K, [[2.0, -1.0], [-1.0, 2.0]])


def test_spring_matrix_single_mass():
    np.testing.assert_array_equal(build_spring_matrix(SystemSpec([1.0], [[1.0]])), [[1.0]])


def test_spring_matrix_matches_pairwise_energy(rng):
    kappa = random_kappa(rng, 3)
    K = build_spring_matrix(SystemSpec(np.ones(3), kappa))
    for _ in range(10):
        x = rng.normal(size=3)
        assert 0.5 * x @ K @ x == pytest.approx(spring_energy(kappa, x), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 5))
def test_quadratic_form_property(seed, d):
    rng = np.random.default_rng(seed)
    kappa = random_kappa(rng, d, dense=bool(seed % 2))
    K = build_spring_matrix(SystemSpec(np.ones(d), kappa))
    x = rng.normal(size=d)
    assert 0.5 * x @ K @ x == pytest.approx(spring_energy(kappa, x), rel=1e-12, abs=1e-12)


def test_principal_sqrt_examples():
    np.testing.assert_array_equal(principal_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(principal_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)
    K = np.array([[2.0, -1.0], [-1.0, 2.0]])
    R = principal_sqrt(K)
    assert np.max(np.abs(R @ R - K)) <= 1e-12
    assert np.all(np.linalg.eigvalsh(R) > 0)


def test_principal_sqrt_tolerates_roundoff_negatives():
    A = np.diag([1.0, -1e-14])
    R = principal_sqrt(A)
    assert R[1, 1] == 0.0
    with pytest.raises(ValueError):
        principal_sqrt(np.diag([1.0, -1e-3]))


def test_decoupled_unit_hamiltonian():
    H = unit_model(N=1, g=0.0).hamiltonian()
    block = np.array([[0, 1j], [-1j, 0]])
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2] = block
    expected[2:, 2:] = block
    np.testing.assert_array_equal(H, expected)
    np.testing.assert_allclose(np.linalg.eigvalsh(H), [-1, -1, 1, 1], atol=1e-15)


def test_hamiltonian_exactly_hermitian(rng):
    for d, N in [(1, 1), (2, 5), (4, 7)]:
        H = random_model(rng, d, N).hamiltonian()
        assert np.array_equal(H, H.conj().T)
        assert np.array_equal(H.real, np.zeros_like(H.real))


def test_sparse_matches_dense(rng):
    m = random_model(rng, 3, 6)
    np.testing.assert_array_equal(m.hamiltonian_sparse().toarray(), m.hamiltonian())


def test_spectrum_pairs(rng):
    for _ in range(5):
        w = np.linalg.eigvalsh(random_model(rng, 3, 4).hamiltonian())
        np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-10)


def classical_frequencies(model):
    """Normal-mode frequencies of the first-order system dz/dt = A z, z = (x, y, p, k).

    The potential matrix is read off the energy function by polarization,
    independently of the Hamiltonian assembly.
    """
    d, N = model.d, model.N
    n = d + N
    K = model.K
    g, nu, s = model.g, model.nu, model.star

    def potential(q):
        x, y = q[:d], q[d:]
        return 0.5 * x @ K @ x + 0.5 * np.sum(nu * (y - g / nu * x[s]) ** 2)

    E = np.eye(n)
    V = np.array([[potential(E[i] + E[j]) - potential(E[i]) - potential(E[j]) for j in range(n)] for i in range(n)])
    Tkin = np.diag(np.concatenate([1.0 / model.mass, nu]))
    A = np.block([[np.zeros((n, n)), Tkin], [-V, np.zeros((n, n))]])
    return np.sort(np.linalg.eigvals(A).imag)


def test_eigenvalues_are_normal_mode_frequencies():
    rng = np.random.default_rng(7)
    N = 4
    m = CompositeModel.from_arrays([1.0], [[1.0]], rng.uniform(0.05, 1.0, N), np.full(N, 1 / np.sqrt(N)))
    np.testing.assert_allclose(np.linalg.eigvalsh(m.hamiltonian()), classical_frequencies(m), atol=1e-10)


def test_eigenvalues_normal_modes_multimass(rng):
    for d, N in [(2, 3), (3, 5)]:
        m = random_model(rng, d, N)
        np.testing.assert_allclose(np.linalg.eigvalsh(m.hamiltonian()), classical_frequencies(m), atol=1e-10)


def test_zero_coupling_decouples(rng):
    m = random_model(rng, 2, 3, g_scale=0.0)
    H = m.hamiltonian()
    primary = np.arange(2 * m.d)
    bath = np.arange(2 * m.d, m.D)
    assert np.all(H[np.ix_(primary, bath)] == 0)


def test_norm_close_to_nu_max_for_weak_coupling():
    # unit primary, flat bath with nu_max above the primary frequency
    N = 256
    nu = np.arange(1, N + 1) * (2.0 / N)
    m = CompositeModel.from_arrays([1.0], [[1.0]], nu, np.full(N, 0.2 / np.sqrt(N)))
    norm = np.max(np.abs(np.linalg.eigvalsh(m.hamiltonian())))
    assert 2.0 * (1 - 0.05) <= norm <= 2.0 * (1 + 0.05)


def test_from_arrays_and_blocks():
    m = CompositeModel.from_arrays([1.0, 2.0], [[1.0, 0.5], [0.5, 1.0]], [0.5, 1.0, 1.5], [0.1, 0.2, 0.3], star_index=1)
    assert (m.d, m.N, m.D, m.star) == (2, 3, 10, 1)
    assert m.blocks()["k"] == slice(7, 10)
    np.testing.assert_allclose(m.G[1], [0.1 / np.sqrt(0.5), 0.2, 0.3 / np.sqrt(1.5)])
    assert np.all(m.G[0] == 0)
    assert m.bath.nu_max == 1.5


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(masses=[0.0], kappa=[[1.0]]), "system.masses"),
        (dict(masses=[1.0, 1.0], kappa=[[1.0]]), "system.kappa"),
        (dict(masses=[1.0, 1.0], kappa=[[1.0, 0.5], [0.4, 1.0]]), "system.kappa"),
        (dict(masses=[1.0], kappa=[[-1.0]]), "system.kappa"),
        (dict(masses=[1.0], kappa=[[1.0]], star_index=1), "system.star_index"),
    ],
)
def test_system_validation(kwargs, field):
    with pytest.raises(ModelError) as err:
        SystemSpec(**kwargs)
    assert err.value.field == field


def test_spring_matrix_must_be_positive_definite():
    # two masses joined to each other but not to a wall: K is singular
    with pytest.raises(ModelError, match="positive definite"):
        CompositeModel.from_arrays([1.0, 1.0], [[0.0, 1.0], [1.0, 0.0]], [1.0], [0.1])


def test_zero_frequency_names_mode():
    with pytest.raises(ModelError) as err:
        BathSpec([1.0, 0.0], [0.1, 0.1])
    assert err.value.field == "bath.frequencies[1]"
    assert "bath.frequencies[1]" in str(err.value)


def test_bath_validation():
    with pytest.raises(ModelError, match="bath.couplings"):
        BathSpec([1.0, 2.0], [0.1])
    with pytest.raises(ModelError, match=r"bath.couplings\[0\]"):
        BathSpec([1.0], [np.nan])
    with pytest.raises(ModelError, match="bath.nu_max"):
        BathSpec([1.0, 2.0], [0.1, 0.1], nu_max=1.5)


def test_specs_are_read_only():
    spec = SystemSpec([1.0], [[1.0]])
    with pytest.raises(ValueError):
        spec.masses[0] = 2.0
