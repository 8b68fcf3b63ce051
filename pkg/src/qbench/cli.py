"""Command-line entry point (``qbench``)."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, harness
from .errors import BackendError, ConfigError, QBenchError

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND = 0, 2, 3


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _flatten(values):
    if values is None:
        return None
    out = []
    for v in values:
        out.extend(v if isinstance(v, list) else [v])
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbench", description=__doc__)
    p.add_argument("--version", action="version", version=f"qbench {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a benchmark into a run directory")
    run.add_argument("benchmark", choices=harness.RUN_KINDS)
    run.add_argument("--backend", default="sample",
                     help="exact | sample | noisy:<noise.json> | mock-remote[:<queue dir>]")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--shots", type=int)
    run.add_argument("--timeout", type=float, default=600.0, help="mock-remote worker timeout (s)")
    run.add_argument("--out", type=Path, help="run directory (default runs/<benchmark>)")
    run.add_argument("--no-render", action="store_true")
    run.add_argument("--topology", help="topology JSON file (bell)")
    run.add_argument("--pairs", choices=("adjacent", "all"), help="qubit pairs to test (bell)")
    run.add_argument("--level", type=_ints, action="append", help="levels, e.g. 1,2 (sm, mandelbrot)")
    run.add_argument("--res", type=int, help="grid resolution (sm, mandelbrot)")
    run.add_argument("--curve", action="append",
                     help="kite | heart8 | heart16 | curve JSON file; repeatable (line)")
    run.add_argument("--batches", type=int, help="tomography batches (line)")
    run.add_argument("--size", type=_ints, action="append", help="matrix sizes, e.g. 2,4,8 (matinv)")
    run.add_argument("--depth", type=_ints, action="append", help="measurement steps (platonic)")
    run.add_argument("--strength", type=float, help="weak measurement strength (platonic)")

    sc = sub.add_parser("score", help="recompute scores.json from stored histograms")
    sc.add_argument("run_dir", type=Path)

    rd = sub.add_parser("render", help="(re)draw images from stored histograms")
    rd.add_argument("run_dir", type=Path)

    rp = sub.add_parser("report", help="aggregate run directories into a device report")
    rp.add_argument("--device", type=Path, action="append", required=True,
                    help="directory holding one device's runs; repeatable")
    rp.add_argument("--qv", type=float, action="append", help="quantum volume per --device")
    rp.add_argument("--log2-qv", action="store_true", help="correlate against log2(QV)")
    rp.add_argument("--out", type=Path, default=Path("report"))

    fn = sub.add_parser("fit-noise", help="split a grid score into statistical and device parts")
    fn.add_argument("--benchmark", choices=("sm", "mandelbrot"), default="sm")
    fn.add_argument("--run", type=Path, help="existing run directory; otherwise one is created")
    fn.add_argument("--backend", default="sample")
    fn.add_argument("--seed", type=int, default=0)
    fn.add_argument("--level", type=int, default=1)
    fn.add_argument("--res", type=int)
    fn.add_argument("--shots", type=int)
    fn.add_argument("--out", type=Path, default=Path("noise-fit"))

    sub.add_parser("list-benchmarks", help="show available benchmarks")
    return p


def _run(args) -> dict:
    opts = {
        "shots": args.shots, "topology": args.topology, "pairs": args.pairs,
        "level": _flatten(args.level), "res": args.res, "curve": args.curve,
        "batches": args.batches, "size": _flatten(args.size), "depth": _flatten(args.depth),
        "strength": args.strength,
    }
    out = args.out or Path("runs") / args.benchmark
    res = harness.run_command(args.benchmark, opts, out, args.backend, args.seed,
                              timeout=args.timeout, do_render=not args.no_render)
    return {"run_dir": str(out), "overall": res["scores"]["overall"],
            "circuits_computed": res["computed"]}


def _fit_noise(args) -> dict:
    run_dir = args.run
    if run_dir is None:
        run_dir = args.out / "run"
        harness.run_command(args.benchmark, {"level": [args.level], "res": args.res,
                                             "shots": args.shots},
                            run_dir, args.backend, args.seed, do_render=False)
    res = harness.fit_noise_command(run_dir, args.out, args.level, args.seed)
    return res["fit"]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            result = _run(args)
        elif args.verb == "score":
            result = harness.score_run(args.run_dir)
        elif args.verb == "render":
            result = {"images": [str(p) for p in harness.render_run(args.run_dir)]}
        elif args.verb == "report":
            result = harness.report_command(args.device, args.out, args.qv, args.log2_qv)
        elif args.verb == "fit-noise":
            result = _fit_noise(args)
        else:
            for name, text in harness.list_benchmarks():
                print(f"{name:12s}{text}")
            return EXIT_OK
    except BackendError as exc:
        print(f"qbench: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ConfigError, QBenchError, OSError, ValueError) as exc:
        print(f"qbench: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(result, indent=1, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
