"""Oracle cross-checks behind ``xyloc verify``."""

from __future__ import annotations

import itertools

import numpy as np

from . import ed
from .chain import ChainSpec, build_hopping_matrix, cauchy, sample_realization
from .entanglement import OccupationState, block_entropy, evolve_correlations
from .lightcone import boundary_correction_exact, boundary_correction_rk4, truncated_mode_error, zz_commutator_norm
from .spectral import eigendecompose, propagator


def _instances(seed, count, sizes):
    for i in range(count):
        n = sizes[i % len(sizes)]
        spec = ChainSpec(n, field=cauchy(0.0, 1.0), master_seed=seed)
        yield sample_realization(spec, i)


def check_spectrum(seed, count) -> float:
    worst = 0.0
    for r in _instances(seed, count, range(2, 7)):
        sd = eigendecompose(build_hopping_matrix(r))
        dense = np.sort(np.linalg.eigvalsh(ed.build_dense_hamiltonian(r)))
        ff = np.sort(
            [sum(s) + r.nu.sum() for k in range(r.n + 1) for s in itertools.combinations(sd.energies, k)]
        )
        worst = max(worst, float(np.abs(dense - ff).max()))
    return worst


def check_commutators(seed, count) -> float:
    worst = 0.0
    for r in _instances(seed, count, range(2, 6)):
        n = r.n
        sd = eigendecompose(build_hopping_matrix(r))
        ev = ed.Evolver(ed.build_dense_hamiltonian(r))
        zs = [ed.site_operator(ed.Z, j, n) for j in range(1, n + 1)]
        for t in (0.3, 1.0, 3.0):
            p = propagator(sd, t)
            for j, k in itertools.product(range(1, n + 1), repeat=2):
                exact = ed.commutator_norm_exact(zs[j - 1], ev.heisenberg(zs[k - 1], t))
                worst = max(worst, abs(exact - zz_commutator_norm(p, j, k)))
    return worst


def check_entropy(seed, count) -> float:
    worst = 0.0
    for r in _instances(seed, count, (6, 8)):
        n = r.n
        sd = eigendecompose(build_hopping_matrix(r))
        state = OccupationState.neel(n)
        ev = ed.Evolver(ed.build_dense_hamiltonian(r))
        psi0 = ed.product_state(state.bits)
        for t in (0.5, 2.0):
            g = evolve_correlations(propagator(sd, t), state)
            psi = ev.state(psi0, t)
            for length in range(1, n):
                block = range(1, length + 1)
                rho = ed.reduced_state_from_vector(psi, block, n)
                worst = max(worst, abs(block_entropy(g, block) - ed.von_neumann_entropy(rho)))
    return worst


def check_truncation(seed, count) -> float:
    worst = 0.0
    for r in _instances(seed, count, (5, 6)):
        n = r.n
        sd = eigendecompose(build_hopping_matrix(r))
        p = propagator(sd, 1.3)
        a = [ed.jw_annihilator(k, n) for k in range(1, n + 1)]
        m = n // 2
        omega = [m - 1, m, m + 1]
        diff = sum(p.v[m - 1, k - 1] * a[k - 1] for k in range(1, n + 1) if k not in omega)
        worst = max(worst, abs(ed.operator_norm(diff) - truncated_mode_error(p, m, omega).exact))
    return worst


def check_boundary_ode(seed, count) -> float:
    worst = 0.0
    for r in _instances(seed, count, (4,)):
        hw = ed.build_dense_hamiltonian(r)
        hb = ed.bond_operator(r.mu[1], 2, 4)
        v_ode, _ = boundary_correction_rk4(hw, hb, 1.0)
        worst = max(worst, float(np.abs(v_ode - boundary_correction_exact(hw, hb, 1.0)).max()))
    return worst


CHECKS = (
    ("many-body spectrum = free-fermion reconstruction", check_spectrum, 1e-8),
    ("ZZ commutator norm = dense singular value", check_commutators, 1e-8),
    ("block entropy = dense von Neumann entropy", check_entropy, 1e-7),
    ("truncated mode error = dense operator norm", check_truncation, 1e-9),
    ("boundary correction RK4 = closed form", check_boundary_ode, 1e-6),
)


def run_checks(seed: int = 7, instances: int = 5, out=print) -> bool:
    ok = True
    for name, fn, tol in CHECKS:
        err = fn(seed, instances)
        passed = err <= tol
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: max error {err:.2e} (tol {tol:.0e})")
    return ok
