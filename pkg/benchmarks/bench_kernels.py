"""Compare the numba and numpy statevector kernels.

    python benchmarks/bench_kernels.py [--qubits 12,16,20] [--repeat 5] [--end-to-end]

Kernel timings apply every 1-qubit gate position and a ladder of
controlled gates to a random state. ``--end-to-end`` additionally times a
small grid run in two subprocesses, one per kernel flavour, switched by
the QBENCH_KERNELS environment variable.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qbench import gates as G
from qbench._accel import HAVE_NUMBA
from qbench.kernels import KERNELS


def random_state(n: int, rng) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def sweep(kernels, state, n):
    one, ctrl = kernels
    h = np.ascontiguousarray(G.H)
    for q in range(n):
        one(state, n, q, h)
    for q in range(n - 1):
        ctrl(state, n, q, q + 1, np.ascontiguousarray(G.X))


def time_flavour(name, n, repeat, rng):
    kern = KERNELS[name]
    state = random_state(n, rng)
    sweep(kern, state.copy(), n)  # warm-up / JIT
    best = float("inf")
    for _ in range(repeat):
        s = state.copy()
        t0 = time.perf_counter()
        sweep(kern, s, n)
        best = min(best, time.perf_counter() - t0)
    return best, s


def end_to_end(level: int, res: int) -> dict:
    code = ("import time; from qbench.bench import riemann; from qbench.backends import SampleBackend;"
            f"riemann.run_grid('microscope', {level}, {res}, 256, SampleBackend(0));"
            "t=time.perf_counter();"
            f"riemann.run_grid('microscope', {level}, {res}, 256, SampleBackend(1));"
            "print(time.perf_counter()-t)")
    out = {}
    for flavour in ("numba", "numpy"):
        env = dict(os.environ, QBENCH_KERNELS=flavour)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out[flavour] = float(r.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", default="10,14,18,20")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("note: numba unavailable or disabled; the 'numba' column runs interpreted loops")
    rng = np.random.default_rng(0)
    print(f"{'qubits':>6} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>8} {'max diff':>10}")
    for n in (int(x) for x in args.qubits.split(",")):
        tb, sb = time_flavour("numba", n, args.repeat, rng)
        tn, sn = time_flavour("numpy", n, args.repeat, np.random.default_rng(rng.integers(1 << 32)))
        # identical input for the correctness comparison
        st = random_state(n, np.random.default_rng(n))
        a, b = st.copy(), st.copy()
        sweep(KERNELS["numba"], a, n)
        sweep(KERNELS["numpy"], b, n)
        print(f"{n:>6} {tb * 1e3:>12.3f} {tn * 1e3:>12.3f} {tn / tb:>8.2f} {np.abs(a - b).max():>10.1e}")
    if args.end_to_end:
        t = end_to_end(level=2, res=16)
        print(f"grid run (level 2, 16x16): numba {t['numba']:.2f} s, numpy {t['numpy']:.2f} s")


if __name__ == "__main__":
    main()
