"""Eigenstate localization: centers, fitted decay lengths, and the
propagator envelope ``|v_jk(t)| <= n exp(-|j - k| / l_max)``."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .kernels import envelope_fit
from .spectral import Propagator, SpectralDecomposition

log = logging.getLogger(__name__)

AMPLITUDE_FLOOR = 1e-12
R2_GATE = 0.8
MIN_FIT_SITES = 4


@dataclass(frozen=True, eq=False)
class LocalizationReport:
    energies: np.ndarray
    centers: np.ndarray  # 1-based sites
    amplitudes: np.ndarray
    inverse_lengths: np.ndarray  # NaN where no fit was possible
    r2: np.ndarray
    sites_used: np.ndarray
    localized: np.ndarray
    l_max: float  # NaN when no eigenstate passes the gate

    @property
    def lengths(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / self.inverse_lengths

    @property
    def n_localized(self) -> int:
        return int(self.localized.sum())


@dataclass(frozen=True)
class PropagatorBoundReport:
    t: float
    l_max: float
    worst_ratio: float  # max_jk |v_jk| / (n exp(-|j-k|/l_max))
    violations: list  # (j, k) 1-based pairs

    @property
    def ok(self) -> bool:
        return not self.violations


def localization_centers(sd: SpectralDecomposition):
    """Peak site (1-based, smallest index on ties) and peak amplitude per eigenstate."""
    amp = np.abs(sd.vectors)
    idx = np.argmax(amp, axis=0)
    return idx + 1, amp[idx, np.arange(sd.n)]


def fit_localization_lengths(
    sd: SpectralDecomposition, floor: float = AMPLITUDE_FLOOR, r2_min: float = R2_GATE
) -> LocalizationReport:
    centers, amplitudes = localization_centers(sd)
    lam, r2, used = envelope_fit(sd.vectors, centers - 1, floor)
    localized = (used >= MIN_FIT_SITES) & np.isfinite(lam) & (lam > 0) & (r2 >= r2_min)
    if localized.any():
        l_max = float(1.0 / lam[localized].min())
    else:
        l_max = float("nan")
        log.info("no eigenstate passed the localization gate (n=%d)", sd.n)
    return LocalizationReport(
        energies=np.asarray(sd.energies),
        centers=centers,
        amplitudes=amplitudes,
        inverse_lengths=lam,
        r2=r2,
        sites_used=used,
        localized=localized,
        l_max=l_max,
    )


def envelope_coverage(sd: SpectralDecomposition, rep: LocalizationReport, slack: float = 1.5):
    """Fraction of sites with ``|psi_a(j)| <= slack * N_a exp(-lam_a |j - j_a|)``,
    one entry per localized eigenstate."""
    sel = np.flatnonzero(rep.localized)
    amp = np.abs(sd.vectors[:, sel])
    dist = np.abs(np.arange(1, sd.n + 1)[:, None] - rep.centers[sel][None, :])
    env = rep.amplitudes[sel] * np.exp(-rep.inverse_lengths[sel] * dist)
    return (amp <= slack * env).mean(axis=0)


def propagator_envelope(n: int, l_max: float) -> np.ndarray:
    d = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return n * np.exp(-d / l_max)


def check_propagator_bound(p: Propagator, rep_or_lmax, floor: float = AMPLITUDE_FLOOR) -> PropagatorBoundReport:
    """Compare ``|v_jk(t)|`` with ``n exp(-|j - k| / l_max)``.

    Far from the diagonal the envelope drops below double precision while the
    computed amplitudes sit at roundoff (~1e-15), so entries not above
    ``floor`` count as zero, as they do in the fits.
    """
    l_max = rep_or_lmax.l_max if isinstance(rep_or_lmax, LocalizationReport) else float(rep_or_lmax)
    if not l_max > 0:
        raise ValueError(f"l_max must be positive, got {l_max}")
    bound = propagator_envelope(p.n, l_max)
    a = np.abs(p.v)
    resolved = a > floor
    bad = np.argwhere(resolved & (a > bound))
    ratio = np.where(resolved, a / bound, 0.0)
    return PropagatorBoundReport(
        t=p.t,
        l_max=l_max,
        worst_ratio=float(ratio.max()),
        violations=[(int(j) + 1, int(k) + 1) for j, k in bad],
    )


def write_localization_csv(path, rep: LocalizationReport) -> None:
    with open(path, "w") as fh:
        fh.write("alpha,energy,center,amplitude,loc_length,r2,localized\n")
        for a in range(rep.energies.size):
            length = rep.lengths[a]
            ls = f"{length:.16e}" if np.isfinite(length) else ""
            fh.write(
                f"{a + 1},{rep.energies[a]:.16e},{rep.centers[a]},{rep.amplitudes[a]:.16e},"
                f"{ls},{rep.r2[a]:.16e},{int(rep.localized[a])}\n"
            )
