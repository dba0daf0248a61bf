"""Light-cone diagnostics.

Exact ``||[Z_j, Z_k(t)]||`` from the single-particle propagator, the
``c n^2 |t| exp(-v d / l_max)`` envelope and its fitted constants, cone
radii with log-versus-linear model comparison, the two flavours of
windowed mode error, and the block/boundary-window decomposition of
``exp(itH)`` checked against the dense oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from . import ed
from .chain import DisorderRealization
from .spectral import Propagator, SpectralDecomposition, propagator_column

NUMERIC_ZERO = 1e-12
DEFAULT_V_GRID = np.geomspace(1e-3, 1e2, 501)
DEFAULT_LOG10_C_GRID = np.round(np.arange(-12.0, 6.0 + 1e-9, 0.02), 10)


@dataclass(frozen=True)
class BoundParams:
    c: float
    v: float
    l_max: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.v > 0):
            raise ValueError(f"bound constants must be positive, got c={self.c}, v={self.v}")
        if not self.l_max > 0:
            raise ValueError(f"l_max must be positive, got {self.l_max}")


@dataclass(frozen=True, eq=False)
class LightConeMap:
    """``norms[i, a] = ||[Z_ref, Z_{sites[a]}(times[i])]||`` with ``d = distances[a]``."""

    n: int
    times: np.ndarray
    distances: np.ndarray
    ref_site: int  # 1-based
    sites: np.ndarray  # 1-based partner sites
    norms: np.ndarray
    l_max: float = float("nan")
    bound: np.ndarray | None = None

    def with_bound(self, c: float, v: float) -> LightConeMap:
        bp = BoundParams(c, v, self.l_max)
        b = eval_bound(bp, self.n, self.times[:, None], self.distances[None, :])
        return replace(self, bound=np.asarray(b, dtype=np.float64))


def zz_norm_from_amplitude(x):
    """``4 x sqrt(1 - x^2)`` for ``x = |v_kj(t)|``, clipped to the unit interval."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return 4.0 * x * np.sqrt(1.0 - x * x)


def zz_commutator_norm(p: Propagator, j: int, k: int) -> float:
    """``||[Z_j, e^{itH} Z_k e^{-itH}]||`` (1-based sites).

    ``Z_k(t) = 1 - 2 a_k(t)^dag a_k(t)`` is quadratic; with ``u`` row ``k``
    of ``v(t)`` the commutator has single-particle matrix
    ``4 (conj(u_j) e_j u^T - u_j conj(u) e_j^T)``, rank two with eigenvalues
    ``+-4i |u_j| sqrt(1 - |u_j|^2)``.
    """
    n = p.n
    if not (1 <= j <= n and 1 <= k <= n):
        raise IndexError(f"sites ({j}, {k}) outside 1..{n}")
    return float(zz_norm_from_amplitude(abs(p.v[k - 1, j - 1])))


def commutator_map(
    sd: SpectralDecomposition,
    times: Sequence[float],
    ref_site: int | None = None,
    max_distance: int | None = None,
    l_max: float = float("nan"),
) -> LightConeMap:
    """Norms for the reference site against every site to its right.

    Only column ``ref_site`` of ``v(t)`` is needed, so each time costs
    ``O(n^2)``.  The default reference is the central site.
    """
    n = sd.n
    if ref_site is None:
        ref_site = (n + 1) // 2
    if not 1 <= ref_site <= n:
        raise IndexError(f"reference site {ref_site} outside 1..{n}")
    dmax = n - ref_site if max_distance is None else min(max_distance, n - ref_site)
    distances = np.arange(dmax + 1)
    sites = ref_site + distances
    times = np.asarray(times, dtype=np.float64)
    norms = np.empty((times.size, distances.size))
    for i, t in enumerate(times):
        col = propagator_column(sd, t, ref_site - 1)
        norms[i] = zz_norm_from_amplitude(np.abs(col[sites - 1]))
    return LightConeMap(n, times, distances, ref_site, sites, norms, float(l_max))


def eval_bound(bp: BoundParams, n: int, t, d):
    """``c n^2 |t| exp(-v d / l_max)``."""
    d = np.asarray(d)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    out = bp.c * n**2 * np.abs(t) * np.exp(-bp.v * d / bp.l_max)
    return float(out) if np.ndim(out) == 0 else out


class BoundFit(NamedTuple):
    c: float
    v: float
    margin: float  # min over populated entries of log10(bound / norm)
    finite: bool
    entries: int

    def params(self, l_max: float) -> BoundParams:
        return BoundParams(self.c, self.v, l_max)


def _stack(maps, floor):
    cols = []
    for m in maps:
        if not m.l_max > 0:
            raise ValueError("every map needs a positive l_max")
        t = np.broadcast_to(m.times[:, None], m.norms.shape)
        d = np.broadcast_to(m.distances[None, :], m.norms.shape)
        keep = m.norms > floor
        cols.append(
            (m.norms[keep], np.abs(t[keep]), d[keep].astype(float), np.full(keep.sum(), m.l_max), m.n)
        )
    if not cols:
        return None
    c = np.concatenate([x[0] for x in cols])
    t = np.concatenate([x[1] for x in cols])
    d = np.concatenate([x[2] for x in cols])
    lm = np.concatenate([x[3] for x in cols])
    n = np.concatenate([np.full(x[0].size, x[4], dtype=float) for x in cols])
    return c, t, d, lm, n


def fit_bound_constants(
    maps,
    l_max: float | None = None,
    v_grid=DEFAULT_V_GRID,
    log10_c_grid=DEFAULT_LOG10_C_GRID,
    floor: float = NUMERIC_ZERO,
) -> BoundFit:
    """Grid search for ``(c, v)`` with ``c n^2 |t| e^{-v d/l_max} >= C(d, t)`` everywhere.

    For each ``v`` the smallest admissible ``c`` on the grid is taken; among
    those pairs the one with the smallest mean log-gap over the populated
    entries (``C > floor``) wins.  Several maps (an ensemble, each with its
    own ``l_max``) are fitted jointly.
    """
    if isinstance(maps, LightConeMap):
        maps = [maps if l_max is None else replace(maps, l_max=float(l_max))]
    elif l_max is not None:
        maps = [replace(m, l_max=float(l_max)) for m in maps]
    if not maps:
        raise ValueError("no light-cone data to fit")
    v_grid = np.asarray(v_grid, dtype=np.float64)
    lc_grid = np.asarray(log10_c_grid, dtype=np.float64)
    data = _stack(maps, floor)
    c, t, d, lm, n = data
    if c.size == 0:
        return BoundFit(10 ** lc_grid[0], float(v_grid[0]), math.inf, True, 0)
    base = np.log10(c) - np.log10(n**2 * t)
    scaled = d / lm / math.log(10.0)
    best = None
    for v in v_grid:
        need = np.max(base + v * scaled)
        k = np.searchsorted(lc_grid, need - 1e-12)
        if k >= lc_grid.size:
            continue
        gap = lc_grid[k] - v * scaled - base
        score = gap.mean()
        if best is None or score < best[0]:
            best = (score, lc_grid[k], v, gap.min())
    if best is None:
        return BoundFit(math.inf, float(v_grid[0]), -math.inf, False, int(c.size))
    _, lc, v, margin = best
    return BoundFit(float(10**lc), float(v), float(margin), True, int(c.size))


def bound_violations(maps, c: float, v: float, floor: float = NUMERIC_ZERO):
    """``(violations, grid points)`` of the envelope over a set of maps."""
    if isinstance(maps, LightConeMap):
        maps = [maps]
    bad = total = 0
    for m in maps:
        b = eval_bound(BoundParams(c, v, m.l_max), m.n, m.times[:, None], m.distances[None, :])
        bad += int(np.sum((m.norms > floor) & (m.norms > b)))
        total += m.norms.size
    return bad, total


# --------------------------------------------------------------------------
# cone radius
# --------------------------------------------------------------------------


class ModelFit(NamedTuple):
    params: tuple
    rss: float


class ConeRadius(NamedTuple):
    times: np.ndarray
    radius: np.ndarray
    log_model: ModelFit  # r ~ a + b ln t
    linear_model: ModelFit  # r ~ v t


def radius_from_norms(norms: np.ndarray, distances: np.ndarray, threshold: float) -> np.ndarray:
    above = norms >= threshold
    r = np.where(above, distances[None, :], 0).max(axis=1)
    return r.astype(np.float64)


def fit_cone_models(times, radius) -> tuple[ModelFit, ModelFit]:
    t = np.asarray(times, dtype=np.float64)
    r = np.asarray(radius, dtype=np.float64)
    a_mat = np.column_stack([np.ones_like(t), np.log(t)])
    coef, *_ = np.linalg.lstsq(a_mat, r, rcond=None)
    rss_log = float(np.sum((r - a_mat @ coef) ** 2))
    slope = float(t @ r / (t @ t))
    rss_lin = float(np.sum((r - slope * t) ** 2))
    return ModelFit((float(coef[0]), float(coef[1])), rss_log), ModelFit((slope,), rss_lin)


def cone_radius(m: LightConeMap, threshold: float, t_range=None) -> ConeRadius:
    if not 0 < threshold < 2:
        raise ValueError("threshold must lie in (0, 2)")
    r = radius_from_norms(m.norms, m.distances, threshold)
    t = m.times
    sel = np.ones(t.size, dtype=bool) if t_range is None else (t >= t_range[0]) & (t <= t_range[1])
    log_fit, lin_fit = fit_cone_models(t[sel], r[sel])
    return ConeRadius(t, r, log_fit, lin_fit)


# --------------------------------------------------------------------------
# windowed mode errors
# --------------------------------------------------------------------------


class ModeError(NamedTuple):
    exact: float  # l2 norm of the dropped coefficients
    l1: float  # sum of dropped |v_mk|
    envelope: float  # sum_{k not in window} n exp(-|m-k|/l_max); NaN without l_max


def _window(omega, n):
    sites = np.unique(np.asarray(list(omega), dtype=int))
    if sites.size == 0:
        raise ValueError("window is empty")
    if sites[0] < 1 or sites[-1] > n:
        raise IndexError(f"window {omega} outside 1..{n}")
    return sites


def truncated_mode_error(p: Propagator, m: int, omega, l_max: float | None = None) -> ModeError:
    """``||a_m(t) - sum_{k in omega} v_mk a_k||`` and the looser sums."""
    sites = _window(omega, p.n)
    if m not in sites:
        raise ValueError(f"site {m} not in window")
    out = np.ones(p.n, dtype=bool)
    out[sites - 1] = False
    row = np.abs(p.v[m - 1])
    env = math.nan
    if l_max is not None:
        k = np.flatnonzero(out) + 1
        env = float(np.sum(p.n * np.exp(-np.abs(m - k) / l_max)))
    return ModeError(float(np.sqrt(np.sum(row[out] ** 2))), float(row[out].sum()), env)


def hamiltonian_window_mode_error(
    sd_full: SpectralDecomposition, sd_window: SpectralDecomposition, m: int, omega, t: float
) -> float:
    """Distance between ``a_m(t)`` and its evolution under ``M`` restricted to ``omega``.

    ``sd_window`` must decompose ``M[omega, omega]``; ``omega`` contiguous.
    """
    n = sd_full.n
    sites = _window(omega, n)
    if np.any(np.diff(sites) != 1):
        raise ValueError("window must be contiguous")
    if m not in sites:
        raise ValueError(f"site {m} not in window")
    if sd_window.n != sites.size:
        raise ValueError("window decomposition has the wrong size")
    u = sd_full.vectors
    full_row = (u[m - 1] * np.exp(-1j * sd_full.energies * t)) @ u.T
    w = sd_window.vectors
    loc = m - sites[0]
    win_row = (w[loc] * np.exp(-1j * sd_window.energies * t)) @ w.T
    emb = np.zeros(n, dtype=np.complex128)
    emb[sites - 1] = win_row
    return float(np.linalg.norm(full_row - emb))


# --------------------------------------------------------------------------
# block / boundary-window decomposition of exp(itH)
# --------------------------------------------------------------------------

PATCHWORK_MAX_SITES = ed.MAX_SITES


def block_hamiltonian(r: DisorderRealization, first: int, last: int) -> np.ndarray:
    """Dense Hamiltonian of every term supported inside sites ``first..last`` (1-based)."""
    return ed.build_dense_hamiltonian(mu=r.mu[first - 1 : last - 1], nu=r.nu[first - 1 : last])


def _expm_herm(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(i t h)`` for Hermitian ``h``."""
    w, u = np.linalg.eigh(h)
    return (u * np.exp(1j * w * t)) @ u.conj().T


def boundary_correction_exact(h_window: np.ndarray, h_bond: np.ndarray, t: float) -> np.ndarray:
    """Closed form ``exp(-it(H_w - h)) exp(itH_w)`` of the boundary correction."""
    return _expm_herm(h_window - h_bond, -t) @ _expm_herm(h_window, t)


def boundary_correction_rk4(
    h_window: np.ndarray, h_bond: np.ndarray, t: float, step_scale: float = 1e-3
):
    """Integrate ``dV/ds = i V h(s)``, ``h(s) = e^{-isH_w} h e^{isH_w}``, ``V(0) = 1``.

    Classical RK4 in the eigenbasis of ``H_w`` with step at most
    ``step_scale / ||h||``.  Returns ``(V, steps)``.
    """
    dim = h_window.shape[0]
    hn = ed.operator_norm(h_bond)
    if hn == 0.0 or t == 0.0:
        return np.eye(dim, dtype=np.complex128), 0
    steps = int(math.ceil(abs(t) / (step_scale / hn)))
    dt = t / steps
    w, u = np.linalg.eigh(h_window)
    hb = u.conj().T @ h_bond @ u
    gaps = w[:, None] - w[None, :]

    def rhs(s, v):
        return 1j * v @ (hb * np.exp(-1j * s * gaps))

    v = np.eye(dim, dtype=np.complex128)
    s = 0.0
    for _ in range(steps):
        k1 = rhs(s, v)
        k2 = rhs(s + dt / 2, v + dt / 2 * k1)
        k3 = rhs(s + dt / 2, v + dt / 2 * k2)
        k4 = rhs(s + dt, v + dt * k3)
        v = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += dt
    return u @ v @ u.conj().T, steps


class PatchworkResult(NamedTuple):
    omega: int
    t: float
    error: float
    windows: int
    steps: int


def patchwork_unitary(r: DisorderRealization, omega: int, t: float, method: str = "rk4"):
    """Product of block evolutions ``exp(itH_block)`` over a partition into
    ``omega``-site blocks and boundary corrections on ``omega``-site windows
    centred on each internal block boundary (the shifted partition; its two
    half-size end pieces carry no boundary and act trivially).
    Returns ``(Q, windows, steps)``.
    """
    n = r.n
    if n > PATCHWORK_MAX_SITES:
        raise ed.DimensionError(f"patchwork needs the dense oracle (n <= {PATCHWORK_MAX_SITES})")
    if omega < 1 or n % omega:
        raise ValueError(f"block size {omega} must divide n={n}")
    if omega < n and omega % 2:
        raise ValueError("block size must be even when the chain has internal boundaries")
    blocks = [
        _expm_herm(block_hamiltonian(r, b * omega + 1, (b + 1) * omega), t) for b in range(n // omega)
    ]
    q_blocks = reduce(np.kron, blocks)
    if omega == n:
        return q_blocks, 0, 0
    half = omega // 2
    corrections = [np.eye(2**half)]
    steps = 0
    for m in range(omega, n, omega):
        first, last = m - half + 1, m + half
        hw = block_hamiltonian(r, first, last)
        hb = ed.bond_operator(r.mu[m - 1], half, omega)
        if method == "rk4":
            vw, s = boundary_correction_rk4(hw, hb, t)
            steps += s
        elif method == "exact":
            vw = boundary_correction_exact(hw, hb, t)
        else:
            raise ValueError(f"unknown method {method!r}")
        corrections.append(vw)
    corrections.append(np.eye(2**half))
    return q_blocks @ reduce(np.kron, corrections), n // omega - 1, steps


def patchwork_error(r: DisorderRealization, omega: int, t: float, method: str = "rk4") -> PatchworkResult:
    """``||exp(itH) - Q(t)||`` in operator norm."""
    q, windows, steps = patchwork_unitary(r, omega, t, method)
    exact = _expm_herm(ed.build_dense_hamiltonian(r), t)
    return PatchworkResult(omega, float(t), ed.operator_norm(exact - q), windows, steps)


def patchwork_constant(results: Sequence[PatchworkResult], n: int, l_max: float) -> float:
    """Smallest ``c`` with ``error <= c |t| n^2 exp(-omega / (2 l_max))`` for all results."""
    return max(
        (res.error / (abs(res.t) * n**2 * math.exp(-res.omega / (2 * l_max))) for res in results if res.t),
        default=0.0,
    )


def write_lightcone_csv(path, m: LightConeMap) -> None:
    with open(path, "w") as fh:
        fh.write("t,d,j,k,norm,bound\n")
        for i, t in enumerate(m.times):
            for a, d in enumerate(m.distances):
                b = "" if m.bound is None else f"{m.bound[i, a]:.16e}"
                fh.write(f"{t:.16e},{d},{m.ref_site},{m.sites[a]},{m.norms[i, a]:.16e},{b}\n")
