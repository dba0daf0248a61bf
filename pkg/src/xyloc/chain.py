"""Disordered XY chain: disorder distributions, reproducible sampling, hopping matrix.

The chain Hamiltonian is

    H = sum_j mu_j (X_j X_{j+1} + Y_j Y_{j+1}) + sum_j nu_j Z_j

with open boundaries.  After the Jordan-Wigner map it becomes
``sum_jk M_jk a_j^dag a_k + sum_j nu_j`` with ``M`` real symmetric
tridiagonal, ``M_jj = -2 nu_j`` and ``M_{j,j+1} = 2 mu_j``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Distribution",
    "fixed",
    "uniform",
    "cauchy",
    "ChainSpec",
    "DisorderRealization",
    "HoppingMatrix",
    "realization_seed",
    "sample_realization",
    "cauchy_from_uniform",
    "build_hopping_matrix",
    "write_realization_csv",
    "read_realization_csv",
]

_U53 = float(2**53)


@dataclass(frozen=True)
class Distribution:
    """A one-parameter-family disorder law.

    ``kind`` is ``"fixed"`` (``value``), ``"uniform"`` (``low``, ``high``)
    or ``"cauchy"`` (``center``, ``width``).  ``truncate`` (Cauchy only)
    redraws nothing; it clips ``|x - center|`` to at most ``truncate``.
    """

    kind: str
    value: float = 0.0
    low: float = 0.0
    high: float = 0.0
    center: float = 0.0
    width: float = 0.0
    truncate: float | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "uniform", "cauchy"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "uniform" and not self.low < self.high:
            raise ValueError(f"uniform interval [{self.low}, {self.high}] is empty")
        if self.kind == "cauchy":
            if not self.width > 0:
                raise ValueError(f"Cauchy width must be positive, got {self.width}")
            if self.truncate is not None and not self.truncate > 0:
                raise ValueError("Cauchy truncation must be positive")
        for name in ("value", "low", "high", "center", "width"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def random(self) -> bool:
        return self.kind != "fixed"

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in (0, 1) to draws by inverse CDF."""
        if self.kind == "fixed":
            return np.full(u.shape, self.value, dtype=np.float64)
        if self.kind == "uniform":
            return self.low + (self.high - self.low) * u
        x = cauchy_from_uniform(u, self.center, self.width)
        if self.truncate is not None:
            x = np.clip(x, self.center - self.truncate, self.center + self.truncate)
        return x

    def describe(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "value": self.value}
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.low, "high": self.high}
        d = {"kind": "cauchy", "center": self.center, "width": self.width}
        if self.truncate is not None:
            d["truncate"] = self.truncate
        return d


def fixed(value: float) -> Distribution:
    return Distribution("fixed", value=float(value))


def uniform(low: float, high: float) -> Distribution:
    return Distribution("uniform", low=float(low), high=float(high))


def cauchy(center: float, width: float, truncate: float | None = None) -> Distribution:
    return Distribution("cauchy", center=float(center), width=float(width), truncate=truncate)


def cauchy_from_uniform(u, center: float, width: float):
    """Inverse Cauchy CDF: ``center + width * tan(pi (u - 1/2))``."""
    return center + width * np.tan(np.pi * (np.asarray(u, dtype=np.float64) - 0.5))


@dataclass(frozen=True)
class ChainSpec:
    n: int
    coupling: Distribution = field(default_factory=lambda: fixed(-1.0))
    field: Distribution = field(default_factory=lambda: cauchy(0.0, 0.5))
    master_seed: int = 42

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"chain length must be a positive integer, got {self.n}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def describe(self) -> dict:
        return {
            "n": self.n,
            "coupling": self.coupling.describe(),
            "field": self.field.describe(),
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    spec: ChainSpec
    index: int
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        n = self.spec.n
        if self.mu.shape != (n - 1,) or self.nu.shape != (n,):
            raise ValueError("realization arrays have the wrong length")
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.nu))):
            raise ValueError("realization contains non-finite values")
        self.mu.setflags(write=False)
        self.nu.setflags(write=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @classmethod
    def from_arrays(cls, mu, nu, spec: ChainSpec | None = None, index: int = 0):
        """Wrap explicit couplings and fields (tests, hand-built chains)."""
        nu = np.array(nu, dtype=np.float64).reshape(-1)
        mu = np.array(mu, dtype=np.float64).reshape(-1)
        if spec is None:
            spec = ChainSpec(n=nu.size)
        return cls(spec=spec, index=index, mu=mu, nu=nu)

    def restrict(self, first: int, last: int) -> DisorderRealization:
        """Sub-chain of sites ``first..last`` (0-based, inclusive)."""
        sub = ChainSpec(last - first + 1, self.spec.coupling, self.spec.field, self.spec.master_seed)
        return DisorderRealization(
            sub, self.index, self.mu[first:last].copy(), self.nu[first : last + 1].copy()
        )


@dataclass(frozen=True, eq=False)
class HoppingMatrix:
    n: int
    diag: np.ndarray
    offdiag: np.ndarray

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            idx = np.arange(self.n - 1)
            m[idx, idx + 1] = self.offdiag
            m[idx + 1, idx] = self.offdiag
        return m

    def norm1(self) -> float:
        return float(np.abs(self.dense()).sum(axis=0).max())

    def restrict(self, first: int, last: int) -> HoppingMatrix:
        return HoppingMatrix(
            last - first + 1, self.diag[first : last + 1].copy(), self.offdiag[first:last].copy()
        )


def realization_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed sequence of realization ``index``; children 0/1 feed couplings/fields."""
    if index < 0:
        raise ValueError("realization index must be non-negative")
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))


def _open_uniforms(ss: np.random.SeedSequence, size: int) -> np.ndarray:
    # Philox is counter-based; u = (k + 1/2) / 2^53 lies strictly inside (0, 1)
    gen = np.random.Generator(np.random.Philox(ss))
    k = gen.integers(0, 2**53, size=size, dtype=np.uint64)
    return (k.astype(np.float64) + 0.5) / _U53


def sample_realization(spec: ChainSpec, index: int) -> DisorderRealization:
    ss = realization_seed(spec.master_seed, index)
    coupling_ss, field_ss = ss.spawn(2)
    n = spec.n
    mu = spec.coupling.from_uniform(_open_uniforms(coupling_ss, n - 1))
    nu = spec.field.from_uniform(_open_uniforms(field_ss, n))
    return DisorderRealization(spec=spec, index=index, mu=mu, nu=nu)


def build_hopping_matrix(r: DisorderRealization) -> HoppingMatrix:
    return HoppingMatrix(n=r.n, diag=-2.0 * np.asarray(r.nu), offdiag=2.0 * np.asarray(r.mu))


def write_realization_csv(path, r: DisorderRealization) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site", "mu", "nu"])
        for j in range(r.n):
            mu = f"{r.mu[j]:.16e}" if j < r.n - 1 else ""
            w.writerow([j + 1, mu, f"{r.nu[j]:.16e}"])


def read_realization_csv(path, spec: ChainSpec | None = None, index: int = 0) -> DisorderRealization:
    mu, nu = [], []
    with open(Path(path), newline="") as fh:
        for row in csv.DictReader(fh):
            nu.append(float(row["nu"]))
            if row["mu"] != "":
                mu.append(float(row["mu"]))
    return DisorderRealization.from_arrays(mu, nu, spec=spec, index=index)
