"""Compare the numba and pure-numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--sizes 128 256 512] [--repeat 3]

Both paths run in-process (``use_numba=True/False``); the env flag
``XYLOC_NO_NUMBA=1`` only changes the default.  Results must agree, so the
script also reports the largest eigenvalue/eigenvector discrepancy.
"""

import argparse
import time

import numpy as np

from xyloc import _accel
from xyloc.chain import ChainSpec, build_hopping_matrix, sample_realization
from xyloc.kernels import envelope_fit, tql2


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    if not _accel.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    # compile outside the timed region
    tql2(np.zeros(4), np.ones(3), use_numba=True)
    envelope_fit(np.eye(4), np.arange(4), use_numba=True)

    print(f"{'n':>6} {'kernel':>13} {'numba [s]':>11} {'numpy [s]':>11} {'speedup':>8} {'max diff':>10}")
    for n in args.sizes:
        m = build_hopping_matrix(sample_realization(ChainSpec(n, master_seed=args.seed), 0))
        tn, (e1, u1) = best_of(lambda: tql2(m.diag, m.offdiag, use_numba=True), args.repeat)
        tp, (e2, u2) = best_of(lambda: tql2(m.diag, m.offdiag, use_numba=False), args.repeat)
        diff = max(np.abs(e1 - e2).max(), np.abs(u1 - u2).max())
        print(f"{n:>6} {'tql2':>13} {tn:>11.4f} {tp:>11.4f} {tp / tn:>8.1f} {diff:>10.1e}")

        centers = np.argmax(np.abs(u1), axis=0)
        tn, r1 = best_of(lambda: envelope_fit(u1, centers, use_numba=True), args.repeat)
        tp, r2 = best_of(lambda: envelope_fit(u1, centers, use_numba=False), args.repeat)
        ok = np.isfinite(r1[0])
        diff = np.abs(r1[0][ok] - r2[0][ok]).max() if ok.any() else 0.0
        print(f"{n:>6} {'envelope_fit':>13} {tn:>11.4f} {tp:>11.4f} {tp / tn:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
