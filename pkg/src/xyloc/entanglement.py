"""Gaussian quench dynamics and contiguous-block entanglement entropy.

A computational-basis product state is a fermionic Gaussian state, so its
evolution is captured by ``G_jk(t) = <a_j^dag(t) a_k(t)>``.  For a
contiguous block the Jordan-Wigner strings cancel and the spin-block
entropy equals the sum of binary entropies of the block's ``G`` spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spectral import Propagator, SpectralDecomposition, propagator

CLAMP = 1e-9


def neel_state(n: int) -> np.ndarray:
    """Occupations ``(1, 0, 1, 0, ...)``."""
    return (np.arange(n) % 2 == 0).astype(np.int8)


@dataclass(frozen=True, eq=False)
class OccupationState:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 1 or not np.all((b == 0) | (b == 1)):
            raise ValueError("occupations must be a 1-d sequence of 0/1")

    @property
    def n(self) -> int:
        return len(self.bits)

    @classmethod
    def neel(cls, n: int) -> OccupationState:
        return cls(neel_state(n))

    @classmethod
    def parse(cls, text: str, n: int) -> OccupationState:
        """``"neel"``, ``"empty"``, ``"full"`` or an explicit bit string."""
        key = text.strip().lower()
        if key == "neel":
            return cls.neel(n)
        if key == "empty":
            return cls(np.zeros(n, dtype=np.int8))
        if key == "full":
            return cls(np.ones(n, dtype=np.int8))
        bits = np.array([int(c) for c in key], dtype=np.int8)
        if bits.size != n:
            raise ValueError(f"bit string has length {bits.size}, chain has {n} sites")
        return cls(bits)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    g: np.ndarray
    t: float = 0.0

    def particle_number(self) -> float:
        return float(np.trace(self.g).real)


def evolve_correlations(p: Propagator, s: OccupationState) -> CorrelationMatrix:
    """``G_jk(t) = sum_m conj(v_jm) b_m v_km``."""
    b = np.asarray(s.bits, dtype=np.float64)
    if b.size != p.n:
        raise ValueError("state and propagator sizes differ")
    occ = p.v[:, b > 0]
    return CorrelationMatrix(occ.conj() @ occ.T, p.t)


def binary_entropy(g) -> np.ndarray:
    g = np.clip(np.asarray(g, dtype=np.float64), 0.0, 1.0)
    out = np.zeros_like(g)
    inner = (g > CLAMP) & (g < 1.0 - CLAMP)
    x = g[inner]
    out[inner] = -(x * np.log2(x) + (1.0 - x) * np.log2(1.0 - x))
    return out


def _block_sites(block, n):
    sites = np.asarray(list(block), dtype=int)
    if sites.size == 0:
        raise ValueError("block is empty")
    if np.any(np.diff(sites) != 1):
        raise ValueError("block must be a contiguous increasing site range")
    if sites[0] < 1 or sites[-1] > n:
        raise IndexError(f"block outside 1..{n}")
    return sites - 1


def block_entropy(g: CorrelationMatrix, block) -> float:
    """Entanglement entropy in bits of a contiguous block (1-based sites)."""
    idx = _block_sites(block, g.g.shape[0])
    ev = np.linalg.eigvalsh(g.g[np.ix_(idx, idx)])
    return float(binary_entropy(ev).sum())


@dataclass(frozen=True, eq=False)
class EntropyTrace:
    """``entropy[i, b]`` for time ``times[i]`` and block ``blocks[b] = (start, length)``."""

    n: int
    times: np.ndarray
    blocks: list
    entropy: np.ndarray
    c1: float = float("nan")
    c2: float = float("nan")


def half_chain_block(n: int) -> tuple[int, int]:
    return (1, max(1, n // 2))


def entropy_trace(
    sd: SpectralDecomposition,
    state: OccupationState,
    blocks: Sequence[tuple[int, int]],
    times: Sequence[float],
    fit_block: int | None = 0,
) -> EntropyTrace:
    """Block entropies on a time grid, with ``(c1, c2)`` fitted for block
    ``fit_block`` (index into ``blocks``; ``None`` skips the fit)."""
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0 or len(blocks) == 0:
        raise ValueError("time grid and block menu must be nonempty")
    n = sd.n
    out = np.empty((times.size, len(blocks)))
    for i, t in enumerate(times):
        g = evolve_correlations(propagator(sd, t), state)
        for b, (start, length) in enumerate(blocks):
            out[i, b] = block_entropy(g, range(start, start + length))
    tr = EntropyTrace(n, times, [tuple(b) for b in blocks], out)
    if fit_block is not None:
        c1, c2 = fit_entropy_bound(times, out[:, fit_block], n)
        tr = EntropyTrace(n, times, tr.blocks, out, c1, c2)
    return tr


DEFAULT_C2_GRID = np.round(np.arange(0.0, 20.0 + 1e-9, 0.01), 10)


def fit_entropy_bound(times, entropy, n: int, c2_grid=DEFAULT_C2_GRID) -> tuple[float, float]:
    """Tightest ``(c1, c2)`` with ``S(t) <= c1 + c2 log2(n t)`` for grid times ``t >= 1/n``.

    ``c2`` runs over a grid starting at 0; ``c1`` is the exact minimum for
    each ``c2``; the pair with the smallest mean gap is returned.
    Several realizations may be passed as a 2-d ``entropy`` (rows = times).
    """
    times = np.asarray(times, dtype=np.float64)
    s = np.asarray(entropy, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    keep = np.abs(times) >= 1.0 / n
    if not keep.any():
        return 0.0, 0.0
    x = np.log2(n * np.abs(times[keep]))[:, None]
    s = s[keep]
    best = None
    for c2 in c2_grid:
        c1 = float(np.max(s - c2 * x))
        gap = float(np.mean(c1 + c2 * x - s))
        if best is None or gap < best[0] - 1e-12:
            best = (gap, c1, float(c2))
    return best[1], best[2]


def entropy_bound_violations(times, entropy, n: int, c1: float, c2: float, tol: float = 1e-12) -> int:
    times = np.asarray(times, dtype=np.float64)
    s = np.asarray(entropy, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    keep = np.abs(times) >= 1.0 / n
    bound = c1 + c2 * np.log2(n * np.abs(times[keep]))[:, None]
    return int(np.sum(s[keep] > bound + tol))


def write_entropy_csv(path, tr: EntropyTrace) -> None:
    with open(path, "w") as fh:
        fh.write("t,block_start,block_len,entropy_bits\n")
        for i, t in enumerate(tr.times):
            for b, (start, length) in enumerate(tr.blocks):
                fh.write(f"{t:.16e},{start},{length},{tr.entropy[i, b]:.16e}\n")
