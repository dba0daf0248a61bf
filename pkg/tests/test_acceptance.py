"""Acceptance criteria, one test each, at the stated tolerances and ensemble sizes.

Each test prints (and the session summary repeats) a single
``PASS``/``FAIL`` line.  Run standalone with ``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from xyloc import ed, stats  # noqa: E402
from xyloc.capacity import ChannelScenario, epsilon_bound, fannes_chi_bound, simulate_channel  # noqa: E402
from xyloc.chain import ChainSpec, build_hopping_matrix, cauchy, sample_realization  # noqa: E402
from xyloc.ensemble import RunConfig, run  # noqa: E402
from xyloc.entanglement import OccupationState, block_entropy, evolve_correlations  # noqa: E402
from xyloc.lightcone import (  # noqa: E402
    BoundParams,
    commutator_map,
    fit_bound_constants,
    fit_cone_models,
    patchwork_error,
    radius_from_norms,
    zz_commutator_norm,
)
from xyloc.localization import fit_localization_lengths  # noqa: E402
from xyloc.spectral import eigendecompose, propagator  # noqa: E402

pytestmark = pytest.mark.slow


def _sd(n, delta, seed, index):
    r = sample_realization(ChainSpec(n, field=cauchy(0.0, delta), master_seed=seed), index)
    return r, eigendecompose(build_hopping_matrix(r))


def _report(number, title, ok, detail, elapsed, budget):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {number:>2} {title}: {detail} [{elapsed:.1f}s / {budget:.0f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and within


# --------------------------------------------------------------------------


def criterion_1():
    worst = 0.0
    for n in range(2, 9):
        for idx in range(10):
            r, sd = _sd(n, 1.0, 101, idx)
            dense = np.linalg.eigvalsh(ed.build_dense_hamiltonian(r))
            ff = np.sort(
                [sum(s) + r.nu.sum() for k in range(n + 1) for s in itertools.combinations(sd.energies, k)]
            )
            worst = max(worst, float(np.abs(dense - ff).max()))
    return worst <= 1e-8, f"max |E_dense - E_free| = {worst:.2e} (tol 1e-8, 70 chains)"


def criterion_2():
    worst, count = 0.0, 0
    for idx in range(20):
        n = 2 + idx % 7
        r, sd = _sd(n, 1.0, 202, idx)
        ev = ed.Evolver(ed.build_dense_hamiltonian(r))
        zs = [ed.site_operator(ed.Z, j, n) for j in range(1, n + 1)]
        for t in (0.3, 1.0, 3.0):
            p = propagator(sd, t)
            zt = [ev.heisenberg(z, t) for z in zs]
            for j, k in itertools.product(range(1, n + 1), repeat=2):
                exact = ed.commutator_norm_exact(zs[j - 1], zt[k - 1])
                worst = max(worst, abs(exact - zz_commutator_norm(p, j, k)))
                count += 1
    return worst <= 1e-8, f"max deviation {worst:.2e} over {count} (j,k,t) entries (tol 1e-8)"


def criterion_3(tmp):
    cfg = RunConfig(n=256, delta=0.5, realizations=100, lightcone=False, entropy=False, out=str(tmp / "c3"))
    m = run(cfg)
    bad = m["summary"]["propagator_bound_violations"]
    rows = (tmp / "c3" / "localization_summary.csv").read_text().splitlines()[1:]
    failing = sum(1 for row in rows if int(row.split(",")[-1]) > 0)
    worst = max(float(row.split(",")[3]) for row in rows if row.split(",")[3])
    detail = (
        f"{bad} violating (j,k,t) entries in {failing}/100 realizations, "
        f"worst |v|/(n e^(-d/l_max)) = {worst:.3g}"
    )
    return bad == 0, detail


def criterion_4(tmp):
    train = run(RunConfig(n=128, delta=1.0, realizations=50, entropy=False, out=str(tmp / "c4_train")))
    b = train["summary"].get("bound")
    if b is None or not math.isfinite(b["c"]):
        return False, "no finite (c, v) on the training ensemble"
    held = run(
        RunConfig(
            n=128,
            delta=1.0,
            realizations=50,
            seed=4242,
            entropy=False,
            bound_c=b["c"],
            bound_v=b["v"],
            out=str(tmp / "c4_held"),
        )
    )
    hb = held["summary"]["bound"]
    rate = hb["violations"] / hb["grid_points"]
    detail = (
        f"c = {b['c']:.3g}, v = {b['v']:.3g} (training violations {b['violations']}); "
        f"held-out violation rate {100 * rate:.3f}% (limit 1%)"
    )
    return math.isfinite(b["c"]) and b["violations"] == 0 and rate <= 0.01, detail


def criterion_5(tmp):
    clean = run(
        RunConfig(
            n=1024, field="fixed", realizations=1, localization=False, entropy=False, out=str(tmp / "c5_clean")
        )
    )
    slope = clean["summary"]["cone"]["linear_model"]["params"][0]
    ok_clean = abs(slope - 4.0) <= 0.15 * 4.0
    cfg = RunConfig(n=256, delta=2.0, realizations=50, localization=False, entropy=False, out=str(tmp / "c5_dis"))
    dis = run(cfg)
    times = cfg.time_grid()
    med = np.asarray(dis["summary"]["norms"]["median"])
    radius = radius_from_norms(med, np.arange(med.shape[1]), cfg.threshold)
    sel = (times >= 1.0) & (times <= 100.0)
    log_fit, lin_fit = fit_cone_models(times[sel], radius[sel])
    ok_dis = log_fit.rss < lin_fit.rss
    detail = (
        f"clean slope {slope:.3f} vs 4mu = 4 ({100 * abs(slope / 4 - 1):.1f}% off, limit 15%); "
        f"delta=2 residuals log {log_fit.rss:.3g} < linear {lin_fit.rss:.3g}: {ok_dis}"
    )
    return ok_clean and ok_dis, detail


def criterion_6():
    errors = []
    for idx in range(10):
        r, _ = _sd(8, 2.0, 606, idx)
        errors.append([patchwork_error(r, s, 1.0).error for s in (2, 4, 8)])
    errors = np.array(errors)
    monotone = np.all(errors[:, 0] > errors[:, 1]) and np.all(errors[:, 1] > errors[:, 2])
    full = errors[:, 2].max()
    med = np.median(errors, axis=0)
    detail = (
        f"median ||e^(itH) - Q|| for |Omega| = 2,4,8: {med[0]:.3g}, {med[1]:.3g}, {med[2]:.2g}; "
        f"monotone in {int(np.sum((errors[:, 0] > errors[:, 1]) & (errors[:, 1] > errors[:, 2])))}/10; "
        f"full-block max {full:.2e} (tol 1e-6)"
    )
    return bool(monotone) and full <= 1e-6, detail


def criterion_7(tmp):
    cfg = RunConfig(
        n=256,
        delta=1.0,
        realizations=50,
        t_min=1.0,
        t_max=1000.0,
        localization=False,
        lightcone=False,
        out=str(tmp / "c7"),
    )
    eb = run(cfg)["summary"]["entropy_bound"]
    worst = 0.0
    for idx in range(10):
        n = 8 if idx % 2 else 10
        r, sd = _sd(n, 1.0, 707, idx)
        state = OccupationState.neel(n)
        evo = ed.Evolver(ed.build_dense_hamiltonian(r))
        psi0 = ed.product_state(state.bits)
        for t in (0.5, 2.0, 8.0):
            g = evolve_correlations(propagator(sd, t), state)
            psi = evo.state(psi0, t)
            for length in range(1, n):
                block = range(1, length + 1)
                rho = ed.reduced_state_from_vector(psi, block, n)
                worst = max(worst, abs(block_entropy(g, block) - ed.von_neumann_entropy(rho)))
    finite = math.isfinite(eb["c1"]) and math.isfinite(eb["c2"])
    detail = (
        f"c1 = {eb['c1']:.3f}, c2 = {eb['c2']:.2f}, violations {eb['violations']}; "
        f"ED block-entropy deviation {worst:.2e} (tol 1e-7)"
    )
    return finite and eb["violations"] == 0 and worst <= 1e-7, detail


def criterion_8():
    times = np.geomspace(0.1, 100.0, 31)
    t_fixed = 20  # t = 10 on the default grid
    bits = OccupationState.neel(8).bits
    sc = ChannelScenario((1,), (8,), tuple(int(b) for b in bits), times=tuple(times))
    checked = violations = 0
    spread_at = {}
    for delta in (0.1, 2.0):
        runs, maps = [], []
        for idx in range(40):
            r, sd = _sd(8, delta, 808, idx)
            ch = simulate_channel(r, sc)
            rep = fit_localization_lengths(sd)
            runs.append((ch, rep.l_max))
            if rep.l_max > 0:
                maps.append(commutator_map(sd, times, ref_site=1, l_max=rep.l_max))
        fit = fit_bound_constants(maps) if maps else None
        for ch, l_max in runs:
            for i in range(times.size):
                eps_list = [ch.spread[i]]
                if fit is not None and fit.finite and l_max > 0:
                    eps_list.append(epsilon_bound(BoundParams(fit.c, fit.v, l_max), 8, times[i], sc.d_ab).value)
                for eps in eps_list:
                    if eps >= ch.spread[i]:
                        checked += 1
                        violations += ch.chi[i] > min(1.0, fannes_chi_bound(eps, 1)) + 1e-9
        spread_at[delta] = np.array([ch.spread[t_fixed] for ch, _ in runs])
    diff = stats.bootstrap_difference(spread_at[0.1], spread_at[2.0], seed=8)
    detail = (
        f"chi above capped Fannes bound at {violations}/{checked} admissible (t, eps) points; "
        f"median spread at t=10: {np.median(spread_at[0.1]):.3g} (delta=0.1) vs "
        f"{np.median(spread_at[2.0]):.3g} (delta=2), 95% CI of difference [{diff.low:.3g}, {diff.high:.3g}]"
    )
    return violations == 0 and diff.low > 0, detail


def criterion_9():
    parts, ok = [], True
    for delta in (0.05, 0.1, 0.2):
        lm = []
        for idx in range(100):
            _, sd = _sd(512, delta, 909, idx)
            lm.append(fit_localization_lengths(sd).l_max)
        lm = np.asarray(lm)
        med = float(np.nanmedian(lm))
        ratio = med * delta  # mu = J = 1
        inside = 1 / 3 <= ratio <= 3
        ok &= inside
        parts.append(f"delta={delta}: median l_max {med:.1f} = {ratio:.2f} mu/delta")
    return ok, "; ".join(parts) + " (window [1/3, 3])"


_CASES = {"count": 0, "worst": 0.0}


@settings(max_examples=1000, deadline=None, database=None)
@given(
    st.integers(1, 24),
    st.integers(0, 2**63 - 1),
    st.floats(0.01, 10.0),
    st.floats(-100.0, 100.0),
    st.floats(-100.0, 100.0),
)
def _hygiene_case(n, seed, delta, t, s):
    spec = ChainSpec(n, field=cauchy(0.0, delta), master_seed=seed)
    r1, r2 = sample_realization(spec, 0), sample_realization(spec, 0)
    assert r1.mu.tobytes() == r2.mu.tobytes() and r1.nu.tobytes() == r2.nu.tobytes()
    sd = eigendecompose(build_hopping_matrix(r1))
    vt, vs, vts = propagator(sd, t), propagator(sd, s), propagator(sd, t + s)
    again = propagator(eigendecompose(build_hopping_matrix(r2)), t)
    u_err = vt.unitarity_error()
    g_err = float(np.abs(vt.v @ vs.v - vts.v).max())
    assert u_err <= 1e-10
    assert g_err <= 1e-9
    assert np.array_equal(vt.v, again.v)
    _CASES["count"] += 1
    _CASES["worst"] = max(_CASES["worst"], u_err, g_err)


def criterion_10():
    _CASES.update(count=0, worst=0.0)
    try:
        _hygiene_case()
    except AssertionError as exc:
        return False, f"property failure after {_CASES['count']} cases: {exc}"
    return _CASES["count"] >= 1000, (
        f"{_CASES['count']} randomized cases, worst unitarity/group-law error {_CASES['worst']:.2e}"
    )


# --------------------------------------------------------------------------

CRITERIA = [
    (1, "JW equivalence", criterion_1, 60, False),
    (2, "commutator oracle equivalence", criterion_2, 300, False),
    (3, "propagator bound, zero violations", criterion_3, 600, True),
    (4, "light-cone bound fit and held-out check", criterion_4, 900, True),
    (5, "logarithmic vs linear cone", criterion_5, 900, True),
    (6, "patchwork error scaling", criterion_6, 300, False),
    (7, "entropy bound and ED cross-check", criterion_7, 1200, True),
    (8, "capacity bound soundness and spread suppression", criterion_8, 600, False),
    (9, "localization-length scaling", criterion_9, 900, False),
    (10, "engine hygiene property suite", criterion_10, 120, False),
]


def _evaluate(number, title, fn, budget, needs_tmp, tmp):
    t0 = time.perf_counter()
    ok, detail = fn(tmp) if needs_tmp else fn()
    return _report(number, title, ok, detail, time.perf_counter() - t0, budget)


@pytest.mark.parametrize("number,title,fn,budget,needs_tmp", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, budget, needs_tmp, tmp_path):
    assert _evaluate(number, title, fn, budget, needs_tmp, tmp_path), ACCEPTANCE_LINES[-1]


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        results = [_evaluate(*c, Path(d)) for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
