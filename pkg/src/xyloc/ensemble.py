"""Run configuration, ensemble orchestration, CSV/SVG output and the manifest.

Config files are flat ``key = value`` text; ``#`` starts a comment.  Every
key is also a CLI flag (underscores become dashes).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel, capacity, ed, entanglement, lightcone, localization, stats
from .chain import (
    ChainSpec,
    Distribution,
    build_hopping_matrix,
    cauchy,
    fixed,
    realization_seed,
    sample_realization,
    uniform,
    write_realization_csv,
)
from .spectral import eigendecompose, propagator, write_propagator_csv

log = logging.getLogger(__name__)

ANALYSES = ("localization", "lightcone", "entropy", "capacity", "patchwork")
UNITARITY_TOL = 1e-10
ORTHO_TOL = 1e-10


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str):
    t = text.strip().lower()
    return None if t in ("", "none", "auto") else float(t)


def _parse_optional_int(text: str):
    t = text.strip().lower()
    return None if t in ("", "none", "auto") else int(t)


@dataclass
class RunConfig:
    n: int = 200
    coupling: str = "fixed"
    J: float = 1.0
    coupling_low: float = -1.5
    coupling_high: float = -0.5
    field: str = "cauchy"
    nu: float = 0.0
    delta: float = 0.5
    field_low: float = -1.0
    field_high: float = 1.0
    truncate: float | None = None
    seed: int = 42
    realizations: int = 100
    t_min: float = 0.1
    t_max: float = 100.0
    t_points: int = 31
    threshold: float = 1e-3
    out: str = "run"
    localization: bool = True
    lightcone: bool = True
    entropy: bool = True
    capacity: bool = False
    patchwork: bool = False
    propagator: bool = False
    svg: bool = False
    dump_t: float = 1.0
    ref_site: int | None = None
    blocks: str = "half"
    initial_state: str = "neel"
    bound_c: float | None = None
    bound_v: float | None = None
    region_a: str = "1"
    region_b: str = "n"
    patch_sizes: str = "auto"
    patch_t: float = 1.0
    workers: int = 1

    # ------------------------------------------------------------------
    @classmethod
    def field_parsers(cls) -> dict:
        parsers = {}
        for f in dataclasses.fields(cls):
            if f.type in ("int", int):
                parsers[f.name] = int
            elif f.type in ("float", float):
                parsers[f.name] = float
            elif f.type in ("bool", bool):
                parsers[f.name] = _parse_bool
            elif "float" in str(f.type) and "None" in str(f.type):
                parsers[f.name] = _parse_optional_float
            elif "int" in str(f.type) and "None" in str(f.type):
                parsers[f.name] = _parse_optional_int
            else:
                parsers[f.name] = str
        return parsers

    @classmethod
    def from_text(cls, text: str, source: str = "<config>", base: RunConfig | None = None) -> RunConfig:
        cfg = dataclasses.replace(base) if base is not None else cls()
        parsers = cls.field_parsers()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in parsers:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                setattr(cfg, key, parsers[key](value))
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        return cfg

    @classmethod
    def from_file(cls, path, base: RunConfig | None = None) -> RunConfig:
        return cls.from_text(Path(path).read_text(), str(path), base)

    @classmethod
    def from_manifest(cls, path) -> RunConfig:
        data = json.loads(Path(path).read_text())
        return cls(**data["config"])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # ------------------------------------------------------------------
    def coupling_dist(self) -> Distribution:
        if self.coupling == "fixed":
            return fixed(-self.J)
        if self.coupling == "uniform":
            return uniform(self.coupling_low, self.coupling_high)
        raise ConfigError(f"coupling must be 'fixed' or 'uniform', got {self.coupling!r}")

    def field_dist(self) -> Distribution:
        if self.field == "cauchy":
            return cauchy(self.nu, self.delta, self.truncate)
        if self.field == "fixed":
            return fixed(self.nu)
        if self.field == "uniform":
            return uniform(self.field_low, self.field_high)
        raise ConfigError(f"field must be 'cauchy', 'fixed' or 'uniform', got {self.field!r}")

    def chain_spec(self) -> ChainSpec:
        try:
            return ChainSpec(self.n, self.coupling_dist(), self.field_dist(), self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def time_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.t_points)

    def block_menu(self) -> list:
        out = []
        for item in self.blocks.split(","):
            item = item.strip()
            if item == "half":
                out.append(entanglement.half_chain_block(self.n))
            elif ":" in item:
                start, length = (int(x) for x in item.split(":"))
                out.append((start, length))
            else:
                out.append((1, int(item)))
        return out

    def _region(self, text: str) -> tuple:
        sites = []
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..", 1)
                sites.extend(range(site_expr(lo, self.n), site_expr(hi, self.n) + 1))
            else:
                sites.append(site_expr(part, self.n))
        return tuple(sites)

    def regions(self) -> tuple:
        return self._region(self.region_a), self._region(self.region_b)

    def patch_size_list(self) -> list:
        if self.patch_sizes.strip() == "auto":
            return [s for s in range(2, self.n + 1) if self.n % s == 0 and (s % 2 == 0 or s == self.n)]
        return [int(x) for x in self.patch_sizes.split(",")]

    def validate(self) -> None:
        self.chain_spec()
        if self.realizations < 1:
            raise ConfigError("realizations must be at least 1")
        if self.t_points < 1 or not (0 < self.t_min <= self.t_max):
            raise ConfigError("time grid needs t_points >= 1 and 0 < t_min <= t_max")
        if not 0 < self.threshold < 2:
            raise ConfigError("threshold must lie in (0, 2)")
        if self.patchwork and self.n > ed.MAX_SITES:
            raise ConfigError(f"patchwork requires n <= {ed.MAX_SITES}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        try:
            menu = self.block_menu()
            a, b = self.regions()
            sizes = self.patch_size_list()
            entanglement.OccupationState.parse(self.initial_state, self.n)
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from None
        for start, length in menu:
            if length < 1 or start < 1 or start + length - 1 > self.n:
                raise ConfigError(f"block {start}:{length} outside the chain")
        if self.capacity:
            try:
                capacity.ChannelScenario(a, b, (0,) * self.n)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"capacity regions: {exc}") from None
        if self.patchwork:
            for s in sizes:
                if self.n % s or (s < self.n and s % 2):
                    raise ConfigError(f"patch size {s} must divide n and be even")
        if self.ref_site is not None and not 1 <= self.ref_site <= self.n:
            raise ConfigError("ref_site outside the chain")


def site_expr(text: str, n: int) -> int:
    """``"7"``, ``"n"`` or ``"n-2"`` to a 1-based site."""
    text = text.strip().replace(" ", "")
    if text == "n":
        return n
    if text.startswith("n-"):
        return n - int(text[2:])
    return int(text)


# ----------------------------------------------------------------------------
# one realization
# ----------------------------------------------------------------------------


@dataclass
class RealizationResult:
    index: int
    mu: np.ndarray
    nu: np.ndarray
    invariant_errors: dict
    hard_violations: list = field(default_factory=list)
    loc: localization.LocalizationReport | None = None
    propagator_ratio: float = math.nan
    propagator_violations: int = 0
    cone: lightcone.LightConeMap | None = None
    entropy: entanglement.EntropyTrace | None = None
    channel: capacity.ChannelRun | None = None
    patchwork: list = field(default_factory=list)
    dump: np.ndarray | None = None


def process_realization(cfg: RunConfig, index: int) -> RealizationResult:
    spec = cfg.chain_spec()
    times = cfg.time_grid()
    r = sample_realization(spec, index)
    hm = build_hopping_matrix(r)
    sd = eigendecompose(hm)
    resid = sd.residual(hm)
    ortho = sd.orthonormality_error()
    p_dump = propagator(sd, cfg.dump_t)
    unit = p_dump.unitarity_error()
    errors = {"residual": resid, "orthonormality": ortho, "unitarity": unit}
    res = RealizationResult(index, np.asarray(r.mu), np.asarray(r.nu), errors)
    if resid > 1e-10 * (1.0 + hm.norm1()):
        res.hard_violations.append(f"realization {index}: eigen residual {resid:.3e}")
    if ortho > ORTHO_TOL:
        res.hard_violations.append(f"realization {index}: orthonormality error {ortho:.3e}")
    if unit > UNITARITY_TOL:
        res.hard_violations.append(f"realization {index}: unitarity error {unit:.3e}")
    if cfg.propagator:
        res.dump = p_dump.v

    need_lmax = cfg.localization or cfg.lightcone or cfg.capacity
    if need_lmax:
        res.loc = localization.fit_localization_lengths(sd)
    if cfg.localization and res.loc.l_max > 0:
        worst, count = 0.0, 0
        for t in times:
            rep = localization.check_propagator_bound(propagator(sd, t), res.loc)
            worst = max(worst, rep.worst_ratio)
            count += len(rep.violations)
        res.propagator_ratio, res.propagator_violations = worst, count
    if cfg.lightcone:
        res.cone = lightcone.commutator_map(sd, times, cfg.ref_site, l_max=res.loc.l_max)
    if cfg.entropy:
        state = entanglement.OccupationState.parse(cfg.initial_state, cfg.n)
        res.entropy = entanglement.entropy_trace(sd, state, cfg.block_menu(), times, fit_block=0)
        g = entanglement.evolve_correlations(p_dump, state)
        drift = abs(g.particle_number() - float(np.sum(state.bits)))
        res.invariant_errors["particle_number"] = drift
        if drift > 1e-9:
            res.hard_violations.append(f"realization {index}: particle number drift {drift:.3e}")
    if cfg.capacity and cfg.n <= ed.MAX_SITES:
        a, b = cfg.regions()
        state = entanglement.OccupationState.parse(cfg.initial_state, cfg.n)
        sc = capacity.ChannelScenario(a, b, tuple(int(x) for x in state.bits), times=tuple(times))
        res.channel = capacity.simulate_channel(r, sc)
    if cfg.patchwork:
        res.patchwork = [lightcone.patchwork_error(r, s, cfg.patch_t) for s in cfg.patch_size_list()]
    return res


# ----------------------------------------------------------------------------
# aggregation and output
# ----------------------------------------------------------------------------


def aggregate(results: list, cfg: RunConfig) -> dict:
    """Ensemble summaries; deterministic for a fixed config."""
    if not results:
        raise ValueError("nothing to aggregate")
    out: dict = {"realizations": len(results)}
    seed = cfg.seed
    if results[0].loc is not None:
        lm = np.array([r.loc.l_max for r in results])
        finite = lm[np.isfinite(lm)]
        out["l_max"] = {
            "quantiles": stats.quantiles(lm),
            "median_ci": list(stats.bootstrap_ci(finite, seed=seed)) if finite.size else None,
            "unlocalized_realizations": int(np.sum(~np.isfinite(lm))),
        }
        if cfg.localization:
            out["propagator_bound_violations"] = int(sum(r.propagator_violations for r in results))
    if results[0].cone is not None:
        stack = np.stack([r.cone.norms for r in results])
        out["norms"] = stats.summarize(stack)
        med = out["norms"]["median"]
        radius = lightcone.radius_from_norms(med, results[0].cone.distances, cfg.threshold)
        log_fit, lin_fit = lightcone.fit_cone_models(results[0].cone.times, radius)
        out["cone"] = {"radius": radius, "log_model": log_fit._asdict(), "linear_model": lin_fit._asdict()}
        maps = [r.cone for r in results if r.cone.l_max > 0]
        if cfg.bound_c is not None and cfg.bound_v is not None:
            c, v = cfg.bound_c, cfg.bound_v
            fit = None
        elif maps:
            fit = lightcone.fit_bound_constants(maps)
            c, v = fit.c, fit.v
        else:
            c = v = fit = None
        if c is not None and math.isfinite(c) and maps:
            bad, total = lightcone.bound_violations(maps, c, v)
            out["bound"] = {"c": c, "v": v, "violations": bad, "grid_points": total}
            if fit is not None:
                out["bound"]["margin_log10"] = fit.margin
    if results[0].entropy is not None:
        stack = np.stack([r.entropy.entropy for r in results])
        out["entropy"] = stats.summarize(stack)
        tr = results[0].entropy
        c1, c2 = entanglement.fit_entropy_bound(tr.times, stack[:, :, 0].T, cfg.n)
        out["entropy_bound"] = {
            "c1": c1,
            "c2": c2,
            "violations": entanglement.entropy_bound_violations(tr.times, stack[:, :, 0].T, cfg.n, c1, c2),
        }
        final = stack[:, -1, 0]
        out["entropy_final_mean_ci"] = list(stats.bootstrap_ci(final, np.mean, seed=seed + 1))
    if results[0].channel is not None:
        spread = np.stack([r.channel.spread for r in results])
        chi = np.stack([r.channel.chi for r in results])
        out["channel"] = {"spread": stats.summarize(spread), "chi": stats.summarize(chi)}
    if results[0].patchwork:
        errs = np.array([[p.error for p in r.patchwork] for r in results])
        out["patchwork"] = {
            "sizes": [p.omega for p in results[0].patchwork],
            "median_error": np.median(errs, axis=0),
        }
    return out


def _fmt(x) -> str:
    return f"{x:.16e}"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_outputs(outdir: Path, cfg: RunConfig, results: list, summary: dict) -> list:
    spec = cfg.chain_spec()
    files = []
    first = results[0]

    def emit(name):
        files.append(name)
        return outdir / name

    r0 = sample_realization(spec, first.index)
    write_realization_csv(emit("realization.csv"), r0)
    if len(results) > 1:
        (outdir / "realizations").mkdir(exist_ok=True)
        for res in results:
            write_realization_csv(
                emit(f"realizations/realization_{res.index:04d}.csv"), sample_realization(spec, res.index)
            )
    if first.dump is not None:
        from .spectral import Propagator

        write_propagator_csv(emit("propagator.csv"), Propagator(cfg.dump_t, first.dump))
    if cfg.localization and first.loc is not None:
        localization.write_localization_csv(emit("localization.csv"), first.loc)
        with open(emit("localization_summary.csv"), "w") as fh:
            fh.write("realization,l_max,n_localized,propagator_ratio,propagator_violations\n")
            for res in results:
                lm = "" if not np.isfinite(res.loc.l_max) else _fmt(res.loc.l_max)
                ratio = "" if not np.isfinite(res.propagator_ratio) else _fmt(res.propagator_ratio)
                fh.write(f"{res.index},{lm},{res.loc.n_localized},{ratio},{res.propagator_violations}\n")
    if first.cone is not None:
        m = first.cone
        b = summary.get("bound")
        if b is not None and m.l_max > 0:
            m = m.with_bound(b["c"], b["v"])
        lightcone.write_lightcone_csv(emit("lightcone.csv"), m)
        norms = summary["norms"]
        with open(emit("lightcone_summary.csv"), "w") as fh:
            fh.write("t,d,mean,median,max\n")
            for i, t in enumerate(m.times):
                for a, d in enumerate(m.distances):
                    fh.write(
                        f"{_fmt(t)},{d},{_fmt(norms['mean'][i, a])},{_fmt(norms['median'][i, a])},"
                        f"{_fmt(norms['max'][i, a])}\n"
                    )
        with open(emit("cone_radius.csv"), "w") as fh:
            fh.write("t,radius\n")
            for t, rad in zip(m.times, summary["cone"]["radius"]):
                fh.write(f"{_fmt(t)},{int(rad)}\n")
        if cfg.svg:
            from .plots import write_lightcone_svg

            write_lightcone_svg(
                emit("lightcone.svg"),
                m.times,
                m.distances,
                norms["median"],
                summary["cone"]["log_model"]["params"],
                cfg.threshold,
            )
    if first.entropy is not None:
        entanglement.write_entropy_csv(emit("entropy.csv"), first.entropy)
        ent = summary["entropy"]
        tr = first.entropy
        with open(emit("entropy_summary.csv"), "w") as fh:
            fh.write("t,block_start,block_len,mean,median,max\n")
            for i, t in enumerate(tr.times):
                for b, (start, length) in enumerate(tr.blocks):
                    fh.write(
                        f"{_fmt(t)},{start},{length},{_fmt(ent['mean'][i, b])},"
                        f"{_fmt(ent['median'][i, b])},{_fmt(ent['max'][i, b])}\n"
                    )
    if cfg.capacity:
        a, bsites = cfg.regions()
        d_ab = capacity.region_distance(a, bsites)
        b = summary.get("bound")
        c = cfg.bound_c if cfg.bound_c is not None else (b["c"] if b else 1.0)
        v = cfg.bound_v if cfg.bound_v is not None else (b["v"] if b else 1.0)
        lm = first.loc.l_max if first.loc is not None and first.loc.l_max > 0 else 1.0
        bp = lightcone.BoundParams(c, v, lm)
        rows = []
        for i, t in enumerate(cfg.time_grid()):
            eps = capacity.epsilon_bound(bp, cfg.n, t, d_ab).value
            chi = None if first.channel is None else float(first.channel.chi[i])
            rows.append((t, d_ab, eps, capacity.fannes_chi_bound(eps, len(bsites)), chi))
        capacity.write_capacity_csv(emit("capacity.csv"), rows)
    if first.patchwork:
        with open(emit("patchwork.csv"), "w") as fh:
            fh.write("realization,omega,t,error\n")
            for res in results:
                for p in res.patchwork:
                    fh.write(f"{res.index},{p.omega},{_fmt(p.t)},{_fmt(p.error)}\n")
    return files


class RunOutcome(dict):
    """The manifest, plus ``exit_code`` (0 ok, 1 hard invariant violation)."""

    @property
    def exit_code(self) -> int:
        return 1 if self["hard_violations"] else 0


def run(cfg: RunConfig) -> RunOutcome:
    cfg.validate()
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    indices = list(range(cfg.realizations))
    if cfg.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(process_realization, [cfg] * len(indices), indices))
    else:
        results = [process_realization(cfg, i) for i in indices]
    timings["realizations_s"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    summary = aggregate(results, cfg)
    timings["aggregate_s"] = time.perf_counter() - t1
    t2 = time.perf_counter()
    files = _write_outputs(outdir, cfg, results, summary)
    timings["write_s"] = time.perf_counter() - t2
    hard = [v for r in results for v in r.hard_violations]
    seeds = []
    for i in indices:
        ss = realization_seed(cfg.seed, i)
        key = ss.generate_state(2, np.uint64)
        seeds.append({"index": i, "spawn_key": [i], "key128": f"{int(key[1]):016x}{int(key[0]):016x}"})
    manifest = RunOutcome(
        tool="xyloc",
        version=__version__,
        backend=_accel.backend_name(),
        config=cfg.to_dict(),
        chain=cfg.chain_spec().describe(),
        master_seed=cfg.seed,
        realization_seeds=seeds,
        summary=_jsonable(summary),
        invariant_errors={
            k: max(r.invariant_errors.get(k, 0.0) for r in results) for k in results[0].invariant_errors
        },
        hard_violations=hard,
        timings=timings,
        files={name: _sha256(outdir / name) for name in files},
    )
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(_jsonable(dict(manifest)), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for v in hard:
        log.error("invariant violation: %s", v)
    return manifest
