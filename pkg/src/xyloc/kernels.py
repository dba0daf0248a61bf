"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names (``tql2``, ``envelope_fit``) dispatch on
:data:`xyloc._accel.USE_NUMBA`.  Both flavours implement the same algorithm
step for step, so results agree to rounding.
"""

import math

import numpy as np

from . import _accel

EPS = np.finfo(np.float64).eps
MAX_QL_ITER = 60


class ConvergenceError(ArithmeticError):
    """Implicit QL failed to deflate an eigenvalue within the iteration budget."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"tridiagonal QL did not converge for eigenvalue index {index}")


# --------------------------------------------------------------------------
# implicit-shift QL for a symmetric tridiagonal matrix
# --------------------------------------------------------------------------


def _tql2_numpy(d, e, zt):
    # zt holds eigenvectors as rows; returns -1 on success, else failing index
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == MAX_QL_ITER:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = zt[i].copy()
                zi1 = zt[i + 1]
                zt[i] = c * zi - s * zi1
                zt[i + 1] = s * zi + c * zi1
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def _tql2_core(d, e, zt):
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == MAX_QL_ITER:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = zt[i + 1, k]
                    zt[i + 1, k] = s * zt[i, k] + c * f
                    zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


_tql2_numba = _accel.njit(cache=True)(_tql2_core) if _accel.NUMBA_AVAILABLE else None


def tql2(diag, offdiag, use_numba=None):
    """Eigen-decompose the symmetric tridiagonal matrix (diag, offdiag).

    Returns ``(energies, vectors)`` with energies ascending and column ``a``
    of ``vectors`` the normalized eigenvector for ``energies[a]``.
    """
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    d = np.array(diag, dtype=np.float64)
    n = d.shape[0]
    e = np.zeros(n, dtype=np.float64)
    e[: n - 1] = offdiag
    zt = np.eye(n, dtype=np.float64)
    kernel = _tql2_numba if (use_numba and _tql2_numba is not None) else _tql2_numpy
    bad = kernel(d, e, zt)
    if bad >= 0:
        raise ConvergenceError(int(bad))
    order = np.argsort(d, kind="stable")
    zt = zt[order]
    # sign convention: largest-magnitude component of each vector is positive
    peak = np.argmax(np.abs(zt), axis=1)
    zt *= np.sign(zt[np.arange(n), peak])[:, None]
    return d[order], np.ascontiguousarray(zt.T)


# --------------------------------------------------------------------------
# exponential-envelope fits of eigenvector profiles
# --------------------------------------------------------------------------


def _envelope_fit_numpy(vectors, centers, floor):
    n, nstates = vectors.shape
    lam = np.full(nstates, np.nan)
    r2 = np.zeros(nstates)
    used = np.zeros(nstates, dtype=np.int64)
    sites = np.arange(n)
    for a in range(nstates):
        amp = np.abs(vectors[:, a])
        mask = amp > floor
        k = int(mask.sum())
        used[a] = k
        if k < 4:
            continue
        x = np.abs(sites[mask] - centers[a]).astype(np.float64)
        y = np.log(amp[mask]) - math.log(amp[centers[a]])
        sxx = np.sum(x * x)
        if sxx == 0.0:
            continue
        slope = np.sum(x * y) / sxx
        lam[a] = -slope
        resid = y - slope * x
        tss = np.sum((y - y.mean()) ** 2)
        r2[a] = 1.0 - np.sum(resid**2) / tss if tss > 0.0 else 0.0
    return lam, r2, used


def _envelope_fit_core(vectors, centers, floor):
    n, nstates = vectors.shape
    lam = np.full(nstates, np.nan)
    r2 = np.zeros(nstates)
    used = np.zeros(nstates, dtype=np.int64)
    for a in range(nstates):
        c = centers[a]
        lnpeak = math.log(abs(vectors[c, a]))
        k = 0
        sxx = 0.0
        sxy = 0.0
        sy = 0.0
        syy = 0.0
        for j in range(n):
            amp = abs(vectors[j, a])
            if amp > floor:
                k += 1
                x = abs(j - c)
                y = math.log(amp) - lnpeak
                sxx += x * x
                sxy += x * y
                sy += y
                syy += y * y
        used[a] = k
        if k < 4 or sxx == 0.0:
            continue
        slope = sxy / sxx
        lam[a] = -slope
        rss = syy - 2.0 * slope * sxy + slope * slope * sxx
        tss = syy - sy * sy / k
        r2[a] = 1.0 - rss / tss if tss > 0.0 else 0.0
    return lam, r2, used


_envelope_fit_numba = (
    _accel.njit(cache=True)(_envelope_fit_core) if _accel.NUMBA_AVAILABLE else None
)


def envelope_fit(vectors, centers, floor=1e-12, use_numba=None):
    """Least-squares fit of ``ln|psi_j| - ln|psi_center|`` against ``-lam*|j - center|``.

    The line is pinned at the peak amplitude, one free parameter per column.
    Returns ``(lam, r2, used)``: fitted inverse lengths (NaN when fewer than
    four sites clear ``floor``), coefficients of determination, and the
    number of sites entering each fit.  ``centers`` are 0-based.
    """
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    vectors = np.ascontiguousarray(vectors, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.int64)
    kernel = (
        _envelope_fit_numba
        if (use_numba and _envelope_fit_numba is not None)
        else _envelope_fit_numpy
    )
    return kernel(vectors, centers, float(floor))
