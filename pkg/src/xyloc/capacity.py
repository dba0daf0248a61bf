"""Signalling from region A to region B: the epsilon envelope, the Fannes
bound on the Holevo quantity, waiting times, and exact small-chain
simulations of a Pauli-encoded channel."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from . import ed
from .chain import DisorderRealization
from .lightcone import BoundParams

INV_E = 1.0 / math.e
TRACE_DISTANCE_CAP = 2.0


class Epsilon(NamedTuple):
    value: float  # clamped to the trace-norm cap
    raw: float


def epsilon_bound(bp: BoundParams, n: int, t: float, d_ab: float) -> Epsilon:
    """``c n^2 |t| exp(-v d_AB / l_max)``, also clamped to 2."""
    if d_ab < 0:
        raise ValueError("distance must be non-negative")
    raw = bp.c * n**2 * abs(t) * math.exp(-bp.v * d_ab / bp.l_max)
    return Epsilon(min(raw, TRACE_DISTANCE_CAP), raw)


def fannes_chi_bound(eps: float, b_size: int) -> float:
    """``2 eps (|B| - log2 eps)`` in bits, never more than ``|B|``.

    Outside ``0 < eps <= 1/e`` only the dimension bound ``|B|`` is returned.
    """
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if eps == 0:
        return 0.0
    if eps > INV_E:
        return float(b_size)
    return min(float(b_size), 2.0 * eps * (b_size - math.log2(eps)))


def epsilon_crossing_time(bp: BoundParams, n: int, d_ab: float, eps: float) -> float:
    """Time at which the raw epsilon envelope reaches ``eps``."""
    return eps * math.exp(bp.v * d_ab / bp.l_max) / (bp.c * n**2)


class WaitingTime(NamedTuple):
    t: float  # NaN when unreachable on the grid
    reachable: bool


def waiting_time(
    bp: BoundParams, n: int, d_ab: float, chi_target: float, b_size: int, times: Sequence[float]
) -> WaitingTime:
    """First grid time at which the Fannes bound admits ``chi_target`` bits."""
    if not chi_target > 0:
        raise ValueError("target must be positive")
    if chi_target > b_size:
        return WaitingTime(math.nan, False)
    for t in sorted(times):
        if fannes_chi_bound(epsilon_bound(bp, n, t, d_ab).value, b_size) >= chi_target:
            return WaitingTime(float(t), True)
    return WaitingTime(math.nan, False)


def pauli_codebook(a_size: int) -> list[str]:
    """All ``4^|A|`` Pauli strings, identity first."""
    return ["".join(p) for p in itertools.product("IXYZ", repeat=a_size)]


def region_distance(a: Sequence[int], b: Sequence[int]) -> int:
    return int(min(abs(i - j) for i in a for j in b))


@dataclass(frozen=True)
class ChannelScenario:
    region_a: tuple
    region_b: tuple
    bits: tuple
    codebook: tuple = ()
    priors: tuple = ()
    times: tuple = field(default_factory=tuple)

    def __post_init__(self):
        a, b = set(self.region_a), set(self.region_b)
        if not a or not b or a & b:
            raise ValueError("regions A and B must be nonempty and disjoint")
        n = len(self.bits)
        if min(a | b) < 1 or max(a | b) > n:
            raise IndexError("regions must lie inside the chain")
        if not self.codebook:
            object.__setattr__(self, "codebook", tuple(pauli_codebook(len(self.region_a))))
        if not self.priors:
            m = len(self.codebook)
            object.__setattr__(self, "priors", tuple([1.0 / m] * m))
        p = np.asarray(self.priors)
        if len(p) != len(self.codebook) or np.any(p < 0) or not np.isclose(p.sum(), 1.0):
            raise ValueError("priors must be a probability vector over the codebook")
        if any(len(w) != len(self.region_a) for w in self.codebook):
            raise ValueError("codebook words must have one Pauli letter per site of A")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def d_ab(self) -> int:
        return region_distance(self.region_a, self.region_b)


def _encoding_unitary(word: str, region_a, n: int) -> np.ndarray:
    ops = [ed.I2] * n
    for letter, site in zip(word, sorted(region_a)):
        ops[site - 1] = ed.PAULIS[letter]
    return reduce(np.kron, ops)


class ChannelRun(NamedTuple):
    times: np.ndarray
    chi: np.ndarray  # Holevo quantity (bits)
    spread: np.ndarray  # max_k ||rho_B^k(t) - rho_B(t)||_1


def simulate_channel(r: DisorderRealization, sc: ChannelScenario) -> ChannelRun:
    """Dense evolution of every encoded input; ``rho_B(t)`` is the unencoded output."""
    if r.n != sc.n:
        raise ValueError("scenario and realization sizes differ")
    n = r.n
    ev = ed.Evolver(ed.build_dense_hamiltonian(r))
    psi0 = ed.product_state(sc.bits)
    inputs = [_encoding_unitary(w, sc.region_a, n) @ psi0 for w in sc.codebook]
    times = np.asarray(sc.times, dtype=np.float64)
    chi = np.empty(times.size)
    spread = np.empty(times.size)
    for i, t in enumerate(times):
        ref = ed.reduced_state_from_vector(ev.state(psi0, t), sc.region_b, n)
        outs = [ed.reduced_state_from_vector(ev.state(p, t), sc.region_b, n) for p in inputs]
        chi[i] = ed.holevo_chi(sc.priors, outs)
        spread[i] = max(ed.trace_norm(o - ref) for o in outs)
    return ChannelRun(times, chi, spread)


def write_capacity_csv(path, rows) -> None:
    """``rows``: iterables of ``(t, dAB, epsilon, chi_bound, chi_measured | None)``."""
    with open(path, "w") as fh:
        fh.write("t,dAB,epsilon,chi_bound,chi_measured\n")
        for t, d, eps, bound, chi in rows:
            c = "" if chi is None else f"{chi:.16e}"
            fh.write(f"{t:.16e},{d},{eps:.16e},{bound:.16e},{c}\n")
