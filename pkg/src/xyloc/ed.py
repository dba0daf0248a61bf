"""Brute-force dense many-body oracle for chains of at most 12 spins.

Conventions: site 1 is the most significant tensor factor, so basis index
``s`` of an ``n``-spin state has site ``j``'s bit at position ``n - j``
from the right.  ``|0>`` is spin up (``Z = +1``) and an empty fermion mode;
``|1>`` is occupied.  The Jordan-Wigner annihilator is
``a_j = Z_1 ... Z_{j-1} sigma_j`` with ``sigma = |0><1|``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp

MAX_SITES = 12

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])
SIGMA = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DimensionError(ValueError):
    pass


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_SITES:
        raise DimensionError(f"dense oracle limited to 1..{MAX_SITES} sites, got {n}")


def site_operator(op, j: int, n: int, sparse: bool = False):
    """``op`` acting on site ``j`` (1-based) of an ``n``-site chain."""
    _check_n(n)
    if not 1 <= j <= n:
        raise IndexError(f"site {j} outside 1..{n}")
    left = sp.identity(2 ** (j - 1), format="csr")
    right = sp.identity(2 ** (n - j), format="csr")
    out = sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")
    return out if sparse else out.toarray()


def jw_annihilator(j: int, n: int) -> np.ndarray:
    _check_n(n)
    factors = [Z] * (j - 1) + [SIGMA] + [I2] * (n - j)
    return reduce(np.kron, factors)


def build_dense_hamiltonian(r=None, *, mu=None, nu=None) -> np.ndarray:
    """``sum_j mu_j (X_j X_{j+1} + Y_j Y_{j+1}) + sum_j nu_j Z_j`` by Kronecker assembly.

    Accepts a realization or explicit ``mu``/``nu`` arrays.  The result is
    real (Y Y is real) and returned as a float64 array.
    """
    if r is not None:
        mu, nu = r.mu, r.nu
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    n = nu.size
    _check_n(n)
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=np.complex128)
    for j in range(1, n):
        xx = site_operator(X, j, n, sparse=True) @ site_operator(X, j + 1, n, sparse=True)
        yy = site_operator(Y, j, n, sparse=True) @ site_operator(Y, j + 1, n, sparse=True)
        h = h + mu[j - 1] * (xx + yy)
    for j in range(1, n + 1):
        h = h + nu[j - 1] * site_operator(Z, j, n, sparse=True)
    h = h.toarray()
    assert np.abs(h.imag).max() == 0.0
    return np.ascontiguousarray(h.real)


def bond_operator(mu: float, j: int, n: int) -> np.ndarray:
    """``mu (X_j X_{j+1} + Y_j Y_{j+1})`` on an ``n``-site register."""
    xx = site_operator(X, j, n, sparse=True) @ site_operator(X, j + 1, n, sparse=True)
    yy = site_operator(Y, j, n, sparse=True) @ site_operator(Y, j + 1, n, sparse=True)
    return (mu * (xx + yy)).toarray().real


class Evolver:
    """Caches ``eigh(H)`` for repeated exponentials of one Hamiltonian."""

    def __init__(self, h: np.ndarray):
        self.energies, self.vectors = np.linalg.eigh(h)

    def unitary(self, t: float) -> np.ndarray:
        """``exp(-i H t)``."""
        u = self.vectors
        return (u * np.exp(-1j * self.energies * t)) @ u.conj().T

    def state(self, psi: np.ndarray, t: float) -> np.ndarray:
        u = self.vectors
        return u @ (np.exp(-1j * self.energies * t) * (u.conj().T @ psi))

    def heisenberg(self, b: np.ndarray, t: float) -> np.ndarray:
        """``exp(i H t) B exp(-i H t)``."""
        w = self.unitary(t)
        return w.conj().T @ b @ w


def evolve_operator(h: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    if h.shape != b.shape:
        raise ValueError("operator dimensions differ")
    return Evolver(h).heisenberg(b, t)


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.svd(a, compute_uv=False)[0])


def commutator_norm_exact(a: np.ndarray, b_t: np.ndarray) -> float:
    if a.shape != b_t.shape:
        raise ValueError("operator dimensions differ")
    return operator_norm(a @ b_t - b_t @ a)


def product_state(bits) -> np.ndarray:
    """Computational basis vector ``|b_1 ... b_n>``."""
    bits = [int(b) for b in bits]
    _check_n(len(bits))
    psi = np.zeros(2 ** len(bits), dtype=np.complex128)
    psi[int("".join(map(str, bits)), 2)] = 1.0
    return psi


def _region_axes(region, n):
    keep = sorted({int(j) for j in region})
    if any(not 1 <= j <= n for j in keep):
        raise IndexError(f"region {region} outside 1..{n}")
    return keep


def reduced_state(rho: np.ndarray, region, n: int | None = None) -> np.ndarray:
    """Partial trace of ``rho`` onto ``region`` (1-based sites, any order)."""
    if n is None:
        n = int(round(np.log2(rho.shape[0])))
    keep = _region_axes(region, n)
    t = rho.reshape((2,) * (2 * n))
    traced = [j - 1 for j in range(1, n + 1) if j not in keep]
    # trace pairs of (ket axis, bra axis), highest first so indices stay valid
    for ax in sorted(traced, reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def reduced_state_from_vector(psi: np.ndarray, region, n: int | None = None) -> np.ndarray:
    if n is None:
        n = int(round(np.log2(psi.shape[0])))
    keep = _region_axes(region, n)
    rest = [j for j in range(1, n + 1) if j not in keep]
    t = psi.reshape((2,) * n).transpose([j - 1 for j in keep + rest])
    m = t.reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits."""
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())


def trace_norm(a: np.ndarray) -> float:
    """Sum of |eigenvalues| of a Hermitian ``a``."""
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def holevo_chi(probs, states) -> float:
    """``S(sum_k p_k rho_k) - sum_k p_k S(rho_k)`` in bits."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or len(states) != p.size:
        raise ValueError("need one probability per state")
    if np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12):
        raise ValueError("probabilities must be non-negative and sum to 1")
    avg = sum(pk * rk for pk, rk in zip(p, states))
    return von_neumann_entropy(avg) - float(sum(pk * von_neumann_entropy(rk) for pk, rk in zip(p, states)))
