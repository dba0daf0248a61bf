"""Single-particle spectrum and the exact propagator ``v(t) = exp(-i M t)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import HoppingMatrix
from .kernels import ConvergenceError, tql2

__all__ = [
    "ConvergenceError",
    "SpectralDecomposition",
    "Propagator",
    "eigendecompose",
    "propagator",
    "propagator_column",
    "evolve_mode",
    "write_propagator_csv",
]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.energies.shape[0]

    def residual(self, m: HoppingMatrix) -> float:
        """``max_a ||M psi_a - E_a psi_a||_2``."""
        r = m.dense() @ self.vectors - self.vectors * self.energies
        return float(np.linalg.norm(r, axis=0).max())

    def orthonormality_error(self) -> float:
        return float(np.abs(self.vectors.T @ self.vectors - np.eye(self.n)).max())


@dataclass(frozen=True, eq=False)
class Propagator:
    t: float
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.v.shape[0]

    def unitarity_error(self) -> float:
        return float(np.abs(self.v @ self.v.conj().T - np.eye(self.n)).max())


def eigendecompose(m: HoppingMatrix) -> SpectralDecomposition:
    """Full eigendecomposition of the tridiagonal ``M`` by implicit-shift QL.

    Raises :class:`ConvergenceError` (carrying the eigenvalue index) when an
    eigenvalue fails to deflate.
    """
    energies, vectors = tql2(m.diag, m.offdiag)
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(energies, vectors)


def propagator(sd: SpectralDecomposition, t: float) -> Propagator:
    u = sd.vectors
    phase_re = np.cos(sd.energies * t)
    phase_im = -np.sin(sd.energies * t)
    v = (u * phase_re) @ u.T + 1j * ((u * phase_im) @ u.T)
    return Propagator(float(t), v)


def propagator_column(sd: SpectralDecomposition, t: float, k: int) -> np.ndarray:
    """Column ``k`` (0-based) of ``v(t)``, i.e. ``v_{jk}`` for all ``j``; O(n^2)."""
    u = sd.vectors
    return u @ (np.exp(-1j * sd.energies * t) * u[k])


def evolve_mode(p: Propagator, j: int) -> np.ndarray:
    """Coefficients of ``a_j(t) = sum_k v_jk(t) a_k`` (site ``j`` is 1-based)."""
    if not 1 <= j <= p.n:
        raise IndexError(f"site {j} outside 1..{p.n}")
    return p.v[j - 1].copy()


def write_propagator_csv(path, p: Propagator) -> None:
    n = p.n
    j, k = np.divmod(np.arange(n * n), n)
    flat = p.v.reshape(-1)
    with open(path, "w") as fh:
        fh.write("j,k,abs_v,re_v,im_v\n")
        for a, b, z in zip(j + 1, k + 1, flat):
            fh.write(f"{a},{b},{abs(z):.16e},{z.real:.16e},{z.imag:.16e}\n")
