import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyloc import ed
from xyloc.chain import build_hopping_matrix
from xyloc.spectral import eigendecompose
from conftest import realization


def test_single_site_hamiltonian():
    np.testing.assert_array_equal(ed.build_dense_hamiltonian(mu=[], nu=[1.0]), np.diag([1.0, -1.0]))


def test_two_site_spectrum():
    h = ed.build_dense_hamiltonian(mu=[-1.0], nu=[0.0, 0.0])
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-2.0, 0.0, 0.0, 2.0], atol=1e-14)


def test_spin_spectrum_matches_frozen_oracle(frozen):
    r = realization(4)
    np.testing.assert_allclose(
        np.linalg.eigvalsh(ed.build_dense_hamiltonian(r)), frozen["spin_spectrum_n4"], atol=1e-12
    )


@pytest.mark.parametrize("n", range(2, 9))
def test_free_fermion_reconstruction(n):
    for idx in range(3):
        r = realization(n, delta=1.0, seed=5, index=idx)
        e = eigendecompose(build_hopping_matrix(r)).energies
        ff = sorted(sum(s) + r.nu.sum() for k in range(n + 1) for s in itertools.combinations(e, k))
        np.testing.assert_allclose(np.linalg.eigvalsh(ed.build_dense_hamiltonian(r)), ff, atol=1e-8)


def test_jw_anticommutation():
    n = 4
    a = [ed.jw_annihilator(j, n) for j in range(1, n + 1)]
    for j, k in itertools.product(range(n), repeat=2):
        anti = a[j] @ a[k].conj().T + a[k].conj().T @ a[j]
        np.testing.assert_allclose(anti, np.eye(2**n) * (j == k), atol=1e-15)


def test_dimension_cap():
    with pytest.raises(ed.DimensionError):
        ed.site_operator(ed.Z, 1, ed.MAX_SITES + 1)


def test_evolve_operator_basics():
    r = realization(4)
    h = ed.build_dense_hamiltonian(r)
    b = ed.site_operator(ed.X, 2, 4)
    np.testing.assert_allclose(ed.evolve_operator(h, b, 0.0), b, atol=1e-14)
    np.testing.assert_allclose(ed.evolve_operator(h, h, 2.0), h, atol=1e-12)
    assert ed.operator_norm(ed.evolve_operator(h, b, 3.0)) == pytest.approx(ed.operator_norm(b), abs=1e-9)


def test_commutator_norm_examples():
    z = ed.site_operator(ed.Z, 1, 1)
    assert ed.commutator_norm_exact(z, z) == 0.0
    assert ed.commutator_norm_exact(ed.X, ed.Y) == pytest.approx(2.0)


def test_reduced_state_examples():
    psi = ed.product_state([1, 0, 1])
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(ed.reduced_state(rho, [1, 2, 3]), rho)
    np.testing.assert_allclose(ed.reduced_state(rho, [2]), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(ed.reduced_state(rho, [3]), np.diag([0.0, 1.0]))
    bell = (ed.product_state([0, 0]) + ed.product_state([1, 1])) / np.sqrt(2)
    np.testing.assert_allclose(ed.reduced_state_from_vector(bell, [1]), np.eye(2) / 2, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32), st.data())
def test_reduced_state_trace_and_positivity(n, seed, data):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    region = data.draw(st.sets(st.integers(1, n), min_size=1))
    red = ed.reduced_state(rho, region, n)
    assert np.trace(red).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(red).min() >= -1e-10


def test_vector_and_density_partial_traces_agree(rng):
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    for region in ([1], [2, 5], [1, 3, 4]):
        np.testing.assert_allclose(
            ed.reduced_state_from_vector(psi, region, 5), ed.reduced_state(rho, region, 5), atol=1e-14
        )


def test_holevo_examples():
    rho = np.diag([0.3, 0.7])
    assert ed.holevo_chi([0.5, 0.5], [rho, rho]) == pytest.approx(0.0, abs=1e-12)
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert ed.holevo_chi([0.5, 0.5], [p0, p1]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ed.holevo_chi([0.5, 0.6], [p0, p1])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32))
def test_holevo_dimension_bound(m, seed):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(m):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        states.append(g @ g.conj().T / np.trace(g @ g.conj().T).real)
    p = rng.dirichlet(np.ones(m))
    chi = ed.holevo_chi(p, states)
    assert -1e-12 <= chi <= min(np.log2(m), 2.0) + 1e-12


def test_heisenberg_matches_frozen_zz_norms(frozen):
    r = realization(4)
    ev = ed.Evolver(ed.build_dense_hamiltonian(r))
    for j, k in itertools.product(range(1, 5), repeat=2):
        zk = ev.heisenberg(ed.site_operator(ed.Z, k, 4), 1.0)
        got = ed.commutator_norm_exact(ed.site_operator(ed.Z, j, 4), zk)
        assert got == pytest.approx(frozen["zz_norms_t1_n4"][j - 1][k - 1], abs=1e-10)
