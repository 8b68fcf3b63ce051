"""Run directories: manifest, cached histograms, scores and images.

A run directory looks like::

    manifest.json
    histograms/<job key>.json
    scores.json
    images/...

Histograms are written one file per circuit as soon as they are available,
so an interrupted run picks up where it stopped. Scores and images are
pure functions of the manifest plus the histogram files.
"""
from __future__ import annotations

import json
import math
import os
import time
from pathlib import Path

import numpy as np

from . import __version__, render
from .analysis import (BENCHMARKS, ScoreWithError, bin_sizes, binned_points, fit_noise,
                       mean_score, mean_with_error, normalized_error, correlate)
from .backends import Backend, make_backend
from .bench import bell, linedraw, matinv, platonic, riemann
from .errors import ConfigError, MissingData
from .sim import CountsHistogram
from .topology import Topology

RUN_KINDS = ("bell", "sm", "mandelbrot", "line", "matinv", "platonic")
_RIEMANN_KIND = {"sm": "microscope", "mandelbrot": "mandelbrot"}
CHUNK = 64


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    os.replace(tmp, path)
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def timestamp() -> str:
    """UTC ISO time; honours SOURCE_DATE_EPOCH so manifests can be reproducible."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


class CachingBackend(Backend):
    """Serve histograms from ``hist_dir`` and persist every new one immediately."""

    def __init__(self, inner: Backend, hist_dir, chunk: int = CHUNK):
        super().__init__(inner.seed)
        self.inner = inner
        self.hist_dir = Path(hist_dir)
        self.chunk = chunk
        self.computed = 0

    def _path(self, key: str) -> Path:
        return self.hist_dir / f"{key}.json"

    def run_many(self, jobs) -> dict:
        jobs = list(jobs)
        out, todo = {}, []
        for j in jobs:
            p = self._path(j.key)
            if p.exists():
                out[j.key] = CountsHistogram.from_json(read_json(p))
            else:
                todo.append(j)
        for start in range(0, len(todo), self.chunk):
            part = todo[start:start + self.chunk]
            for key, hist in self.inner.run_many(part).items():
                write_json(self._path(key), hist.to_json())
                out[key] = hist
                self.computed += 1
        return {j.key: out[j.key] for j in jobs}

    def describe(self):
        return self.inner.describe()


# ---------------------------------------------------------------- parameters

def _levels_default(benchmark: str) -> list:
    return [1, 2, 3] if benchmark == "sm" else [1, 2]


def _curve_points(spec: str) -> tuple:
    curves = linedraw.reference_curves()
    if spec in curves:
        return spec, curves[spec]
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"unknown curve {spec!r} (use kite, heart8, heart16 or a JSON file)")
    data = read_json(path)
    pts = data["points"] if isinstance(data, dict) else data
    try:
        z = np.array([complex(float(a), float(b)) for a, b in pts])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"curve file {spec}: {exc}") from exc
    name = data.get("name", path.stem) if isinstance(data, dict) else path.stem
    return name, z


def resolve_parameters(benchmark: str, opts: dict) -> dict:
    """Fill omitted options with the standard experimental settings."""
    opts = {k: v for k, v in opts.items() if v is not None}
    shots = opts.get("shots")
    if benchmark == "bell":
        topo = opts.get("topology")
        if topo is None:
            topology = Topology.line(5)
        elif isinstance(topo, (str, Path)):
            try:
                topology = Topology.load(topo)
            except (OSError, ValueError, KeyError) as exc:
                raise ConfigError(f"cannot read topology {topo}: {exc}") from exc
        else:
            topology = Topology.from_json(topo)
        pairs = opts.get("pairs", "adjacent")
        if pairs not in ("adjacent", "all"):
            raise ConfigError("--pairs must be 'adjacent' or 'all'")
        return {"topology": topology.to_json(), "pairs": pairs,
                "shots": int(shots or bell.DEFAULT_SHOTS)}
    if benchmark in _RIEMANN_KIND:
        levels = sorted(set(opts.get("level") or _levels_default(benchmark)))
        if any(n < 1 or n > 4 for n in levels):
            raise ConfigError("levels must lie in 1..4")
        res = int(opts.get("res", 32))
        if res < 2:
            raise ConfigError("--res must be at least 2")
        return {"levels": levels, "resolution": res,
                "shots": {str(n): int(shots or riemann.DEFAULT_SHOTS.get(n, 8192)) for n in levels}}
    if benchmark == "line":
        names = opts.get("curve") or ["kite", "heart8", "heart16"]
        curves = []
        for spec in names:
            name, z = _curve_points(spec)
            try:
                linedraw._check_size(len(z))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            curves.append({"name": name, "points": [[float(p.real), float(p.imag)] for p in z]})
        batches = int(opts.get("batches", linedraw.DEFAULT_BATCHES))
        if batches < 2:
            raise ConfigError("--batches must be at least 2")
        return {"curves": curves, "batches": batches, "shots": int(shots or linedraw.DEFAULT_SHOTS)}
    if benchmark == "matinv":
        sizes = sorted(set(opts.get("size") or [2, 4, 8]))
        bad = [s for s in sizes if s not in matinv.INSTANCES]
        if bad:
            raise ConfigError(f"unsupported sizes {bad}; choose from {sorted(matinv.INSTANCES)}")
        inst = {}
        for s in sizes:
            s1, s2, seed = matinv.INSTANCES[s]
            inst[str(s)] = {"sigma1": s1, "sigma2": s2, "basis_seed": seed,
                            "shots": int(shots or matinv.default_shots(s))}
        return {"instances": inst}
    if benchmark == "platonic":
        depths = sorted(set(opts.get("depth") or [1, 2, 3]))
        if any(d < 1 or d > 6 for d in depths):
            raise ConfigError("depths must lie in 1..6")
        s = float(opts.get("strength", platonic.DEFAULT_STRENGTH))
        if not 0 < s <= 1:
            raise ConfigError("--strength must lie in (0, 1]")
        return {"depths": depths, "strength": s, "shots": int(shots or platonic.DEFAULT_SHOTS)}
    raise ConfigError(f"unknown benchmark {benchmark!r}")


def _instance(size: int, rec: dict) -> matinv.MatinvInstance:
    return matinv.build_instance(size, rec["sigma1"], rec["sigma2"], rec["basis_seed"])


def _curves(params) -> list:
    return [(c["name"], np.array([complex(a, b) for a, b in c["points"]])) for c in params["curves"]]


def plan_jobs(benchmark: str, params: dict) -> list:
    if benchmark == "bell":
        topo = Topology.from_json(params["topology"])
        return bell.bell_jobs(topo, params["pairs"], params["shots"])
    if benchmark in _RIEMANN_KIND:
        kind = _RIEMANN_KIND[benchmark]
        return [j for n in params["levels"]
                for j in riemann.grid_jobs(kind, n, params["resolution"], params["shots"][str(n)])]
    if benchmark == "line":
        return [j for name, z in _curves(params)
                for j in linedraw.tomography_jobs(name, z, params["batches"], params["shots"])]
    if benchmark == "matinv":
        return [j for s, rec in params["instances"].items()
                for j in matinv.column_jobs(_instance(int(s), rec), rec["shots"])]
    if benchmark == "platonic":
        return [j for d in params["depths"]
                for j in platonic.platonic_jobs(d, params["strength"], params["shots"])]
    raise ConfigError(f"unknown benchmark {benchmark!r}")


# ---------------------------------------------------------------- scoring

def _load_histograms(run_dir: Path, keys) -> dict:
    hdir = run_dir / "histograms"
    out, missing = {}, []
    for k in keys:
        p = hdir / f"{k}.json"
        if p.exists():
            out[k] = CountsHistogram.from_json(read_json(p))
        else:
            missing.append(k)
    if missing:
        raise MissingData(f"{len(missing)} histogram(s) missing, e.g. {missing[0]}")
    return out


def _bell_pairs(params) -> list:
    topo = Topology.from_json(params["topology"])
    if params["pairs"] == "adjacent":
        return sorted(topo.directed_pairs())
    n = topo.n_qubits
    return [(a, b) for a in range(n) for b in range(n) if a != b]


def _riemann_levels(benchmark, params, hists) -> dict:
    kind = _RIEMANN_KIND[benchmark]
    runs = {}
    for n in params["levels"]:
        runs[n] = riemann.level_from_histograms(kind, n, params["resolution"],
                                                params["shots"][str(n)], hists)
    return runs


def _line_results(params, hists) -> list:
    return [linedraw.analyse(name, z, params["batches"], hists) for name, z in _curves(params)]


def compute_scores(benchmark: str, params: dict, hists: dict) -> dict:
    out = {"benchmark": benchmark, "overall": None}
    if benchmark == "bell":
        topo = Topology.from_json(params["topology"])
        per_pair = bell.analyse(hists, _bell_pairs(params))
        out["pairs"] = [{"a": a, "b": b, "cbell": r.cbell, "stderr": r.stderr}
                        for (a, b), r in sorted(per_pair.items())]
        out["overall"] = bell.bell_score(per_pair, topo).to_json()
    elif benchmark in _RIEMANN_KIND:
        runs = _riemann_levels(benchmark, params, hists)
        levels, by_level = [], {}
        for n, run in runs.items():
            o_ps, o_1 = riemann.oracle_grids(run.kind, n, run.resolution)
            s_ps, s_1 = riemann.score_grids(run, o_ps, o_1)
            by_level[n] = (s_ps, s_1)
            levels.append({"level": n, "score_ps": s_ps.to_json(), "score_1": s_1.to_json()})
        out["levels"] = levels
        if 1 in by_level and 2 in by_level:
            out["overall"] = riemann.overall_riemann_score([by_level[1], by_level[2]]).to_json()
    elif benchmark == "line":
        results = _line_results(params, hists)
        out["curves"] = [{"curve": r.name, "points": len(r.target), "score": r.score.to_json(),
                          "batch_scores": r.batch_scores} for r in results]
        by_size = {}
        for r in results:
            by_size.setdefault(len(r.target), r.score)
        if 4 in by_size and 8 in by_size:
            out["overall"] = linedraw.overall_line_score(by_size[4], by_size[8]).to_json()
    elif benchmark == "matinv":
        sizes, scores = [], {}
        for s, rec in params["instances"].items():
            inst = _instance(int(s), rec)
            cols = matinv.columns_from_histograms(inst, rec["shots"], hists)
            sc = matinv.matinv_score(cols, inst.ideal)
            scores[int(s)] = sc
            sizes.append({"size": int(s), "score": sc.to_json(),
                          "ideal_max_prob": inst.ideal_max_prob})
        out["sizes"] = sorted(sizes, key=lambda r: r["size"])
        if all(k in scores for k in (2, 4, 8)):
            out["overall"] = matinv.overall_matinv_score([scores[k] for k in (2, 4, 8)]).to_json()
    elif benchmark == "platonic":
        depths, scores = [], {}
        for d in params["depths"]:
            res = platonic.analyse(d, params["strength"], hists)
            scores[d] = res.score
            depths.append({"depth": d, "score": res.score.to_json(),
                           "low_statistics": int(sum(res.low_stats))})
        out["depths"] = depths
        if all(k in scores for k in (1, 2, 3)):
            out["overall"] = platonic.overall_platonic_score([scores[k] for k in (1, 2, 3)]).to_json()
    else:
        raise ConfigError(f"unknown benchmark {benchmark!r}")
    return out


def load_manifest(run_dir) -> dict:
    p = Path(run_dir) / "manifest.json"
    if not p.exists():
        raise MissingData(f"no manifest.json in {run_dir}")
    return read_json(p)


def score_run(run_dir) -> dict:
    run_dir = Path(run_dir)
    man = load_manifest(run_dir)
    keys = [j.key for j in plan_jobs(man["benchmark"], man["parameters"])]
    scores = compute_scores(man["benchmark"], man["parameters"], _load_histograms(run_dir, keys))
    write_json(run_dir / "scores.json", scores)
    return scores


# ---------------------------------------------------------------- rendering

def render_run(run_dir) -> list:
    run_dir = Path(run_dir)
    man = load_manifest(run_dir)
    benchmark, params = man["benchmark"], man["parameters"]
    keys = [j.key for j in plan_jobs(benchmark, params)]
    hists = _load_histograms(run_dir, keys)
    img = run_dir / "images"
    img.mkdir(parents=True, exist_ok=True)
    files = []
    if benchmark == "bell":
        topo = Topology.from_json(params["topology"])
        per_pair = bell.analyse(hists, _bell_pairs(params))
        files += render.write_gray(img / "bell_heatmap",
                                   render.bell_heatmap_image(bell.heatmap(per_pair, topo.n_qubits)))
    elif benchmark in _RIEMANN_KIND:
        for n, run in _riemann_levels(benchmark, params, hists).items():
            o_ps, o_1 = riemann.oracle_grids(run.kind, n, run.resolution)
            stem = f"{benchmark}_n{n}"
            files += render.write_gray(img / f"{stem}_ps", render.grid_image(run.grid_ps))
            files += render.write_gray(img / f"{stem}_p1", render.grid_image(run.grid_1))
            files += render.write_gray(img / f"{stem}_ps_oracle", render.grid_image(o_ps))
            files += render.write_gray(img / f"{stem}_p1_oracle", render.grid_image(o_1))
    elif benchmark == "line":
        for r in _line_results(params, hists):
            files.append(render.line_drawing_svg(r.target, r.estimates[0], img / f"line_{r.name}.svg"))
    elif benchmark == "matinv":
        for s, rec in params["instances"].items():
            inst = _instance(int(s), rec)
            cols = matinv.columns_from_histograms(inst, rec["shots"], hists)
            top = inst.ideal_max_prob
            files += render.write_gray(img / f"matinv_{s}",
                                       render.matinv_image(matinv.histogram_darkness(cols.probs, top)))
            files += render.write_gray(img / f"matinv_{s}_ideal",
                                       render.matinv_image(matinv.histogram_darkness(inst.ideal, top)))
    elif benchmark == "platonic":
        for d in params["depths"]:
            res = platonic.analyse(d, params["strength"], hists)
            files.append(render.platonic_svg(res, img / f"platonic_d{d}.svg"))
    return [Path(f) for f in files]


# ---------------------------------------------------------------- running

def build_manifest(benchmark: str, params: dict, backend: Backend, seed: int, n_jobs: int,
                   total_shots: int) -> dict:
    return {
        "benchmark": benchmark,
        "parameters": params,
        "backend": backend.describe(),
        "seed": int(seed),
        "timestamp": timestamp(),
        "version": __version__,
        "shots": {"circuits": n_jobs, "total": int(total_shots)},
    }


def _same_run(old: dict, new: dict) -> bool:
    fields = ("benchmark", "parameters", "seed", "backend")
    return all(old.get(f) == new.get(f) for f in fields)


def run_command(benchmark: str, opts: dict, out_dir, backend_spec: str = "sample", seed: int = 0,
                timeout: float = 600.0, do_render: bool = True) -> dict:
    """Execute a benchmark into ``out_dir``; reuses any histograms already there."""
    if benchmark not in RUN_KINDS:
        raise ConfigError(f"unknown benchmark {benchmark!r}; choose from {', '.join(RUN_KINDS)}")
    params = json.loads(json.dumps(resolve_parameters(benchmark, opts)))
    backend = make_backend(backend_spec, seed, timeout)
    jobs = plan_jobs(benchmark, params)
    out_dir = Path(out_dir)
    manifest = build_manifest(benchmark, params, backend, seed, len(jobs),
                              sum(j.shots for j in jobs))
    mpath = out_dir / "manifest.json"
    if mpath.exists():
        old = read_json(mpath)
        if not _same_run(old, manifest):
            raise ConfigError(f"{out_dir} holds a different run; choose another --out")
        manifest = old
    else:
        write_json(mpath, manifest)
    cache = CachingBackend(backend, out_dir / "histograms")
    cache.run_many(jobs)
    scores = score_run(out_dir)
    images = render_run(out_dir) if do_render else []
    return {"manifest": manifest, "scores": scores, "images": [str(p) for p in images],
            "computed": cache.computed}


# ---------------------------------------------------------------- device report

def collect_overall(device_dir) -> dict:
    """Overall scores found in the run directories below ``device_dir``."""
    found = {}
    for mpath in sorted(Path(device_dir).rglob("manifest.json")):
        spath = mpath.parent / "scores.json"
        if not spath.exists():
            continue
        sc = read_json(spath)
        if sc.get("overall") and sc["benchmark"] not in found:
            found[sc["benchmark"]] = ScoreWithError(sc["overall"]["value"], sc["overall"]["stderr"])
    return found


def device_report(device_dir, quantum_volume=None) -> dict:
    overall = collect_overall(device_dir)
    if not overall:
        raise MissingData(f"no scored runs below {device_dir}")
    rep = {
        "device": Path(device_dir).resolve().name,
        "scores": {b: overall[b].to_json() for b in BENCHMARKS if b in overall},
        "normalized": {b: normalized_error(b, overall[b].value) for b in BENCHMARKS if b in overall},
        "missing": [b for b in BENCHMARKS if b not in overall],
        "mean_score": None,
        "quantum_volume": quantum_volume,
    }
    if not rep["missing"]:
        rep["mean_score"] = mean_score(overall)
    return rep


def report_command(device_dirs, out_dir, qvs=None, log2_qv: bool = False) -> dict:
    out_dir = Path(out_dir)
    qvs = list(qvs or [])
    if qvs and len(qvs) != len(device_dirs):
        raise ConfigError("give one --qv per --device")
    reports = [device_report(d, qvs[i] if qvs else None) for i, d in enumerate(device_dirs)]
    result = {"devices": reports, "correlation": None}
    complete = [r for r in reports if r["mean_score"] is not None and r["quantum_volume"] is not None]
    if len(complete) >= 3:
        r, conf = correlate([x["mean_score"] for x in complete],
                            [x["quantum_volume"] for x in complete], log2_qv)
        result["correlation"] = {"pearson_r": r, "confidence": conf, "log2_qv": log2_qv,
                                 "devices": len(complete)}
    write_json(out_dir / "report.json", result)
    if len(reports) == 1:
        rep = reports[0]
        labels = list(rep["normalized"])
        title = ("mean score " + (f"{rep['mean_score']:.3g}" if rep["mean_score"] else "n/a"))
        render.bar_chart_svg(labels, [rep["normalized"][b] for b in labels],
                             out_dir / "report.svg", title=title)
    else:
        labels = [r["device"] for r in reports]
        vals = [r["mean_score"] if r["mean_score"] is not None else float("nan") for r in reports]
        render.bar_chart_svg(labels, vals, out_dir / "report.svg", title="mean scores")
    return result


# ---------------------------------------------------------------- noise fit

def _shot_table(run: riemann.LevelRun, hists: dict, n: int, kind: str) -> list:
    """Per-pixel outcome arrays: 1/0 for the read-out bit of a valid shot, 2 for rejected."""
    table = []
    for r in range(run.resolution):
        for col in range(run.resolution):
            h = hists[riemann.pixel_key(kind, n, r, col)]
            shots = int(round(h.shots))
            ones = int(round(sum(v for k, v in h.counts.items() if k[0] == "1")))
            valid = int(round(h.valid_shots))
            arr = np.full(shots, 2, dtype=np.int8)
            arr[:valid] = 0
            arr[:ones] = 1
            table.append(arr)
    return table


def riemann_bin_score(kind: str, n: int, resolution: int):
    """Score function for one bin: mean of the two RMS pixel scores."""
    o_ps, o_1 = riemann.oracle_grids(kind, n, resolution)
    o_ps, o_1 = o_ps.reshape(-1), o_1.reshape(-1)
    m = (1 << n) - 1

    def score(bins, B):
        arr = np.stack(bins)
        valid = (arr != 2).sum(axis=1)
        ones = (arr == 1).sum(axis=1)
        ps = (valid / B) ** (1 / m)
        q = np.where(valid > 0, ones / np.maximum(valid, 1), 0.0)
        s_ps = math.sqrt(np.mean((ps - o_ps) ** 2))
        s_1 = math.sqrt(np.mean((q - o_1) ** 2))
        return 0.5 * (s_ps + s_1)

    return score


def fit_noise_run(run_dir, level: int = 1, seed: int = 0) -> tuple:
    run_dir = Path(run_dir)
    man = load_manifest(run_dir)
    benchmark, params = man["benchmark"], man["parameters"]
    if benchmark not in _RIEMANN_KIND:
        raise ConfigError("noise fitting is implemented for the sm and mandelbrot benchmarks")
    if man["backend"]["kind"] == "exact":
        raise ConfigError("noise fitting needs sampled histograms, not the exact backend")
    if level not in params["levels"]:
        raise ConfigError(f"run has no level {level}")
    kind = _RIEMANN_KIND[benchmark]
    keys = [riemann.pixel_key(kind, level, r, c) for r in range(params["resolution"])
            for c in range(params["resolution"])]
    hists = _load_histograms(run_dir, keys)
    run = riemann.level_from_histograms(kind, level, params["resolution"],
                                        params["shots"][str(level)], hists)
    table = _shot_table(run, hists, level, kind)
    sizes = bin_sizes(int(params["shots"][str(level)]))
    rng = np.random.default_rng(seed)
    points, errors = binned_points(table, riemann_bin_score(kind, level, params["resolution"]),
                                   sizes, rng)
    errors = [max(e, 1e-12) for e in errors]
    fit = fit_noise(points, errors)
    result = {"benchmark": benchmark, "level": level, "run": str(run_dir),
              "points": [{"shots": int(N), "score": float(s), "stderr": float(e)}
                         for (N, s), e in zip(points, errors)],
              "fit": fit.to_json()}
    return result, fit, points, errors


def fit_noise_command(run_dir, out_dir, level: int = 1, seed: int = 0) -> dict:
    result, fit, points, errors = fit_noise_run(run_dir, level, seed)
    out_dir = Path(out_dir)
    write_json(out_dir / "noise_fit.json", result)
    render.scatter_fit_svg(points, errors, fit, out_dir / "noise_fit.svg")
    return result


def list_benchmarks() -> list:
    return [
        ("bell", "Bell test over qubit pairs of a topology"),
        ("sm", "Schroedinger's Microscope pixel grids"),
        ("mandelbrot", "Mandelbrot pixel grids"),
        ("line", "Line Drawing by QFT state preparation and Pauli tomography"),
        ("matinv", "Matrix inversion by QSVT"),
        ("platonic", "Platonic fractals from weak measurements"),
    ]
