"""Bell test between (possibly distant) qubits of a device graph."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import gates as G
from ..analysis import ScoreWithError
from ..backends import Job
from ..circuit import Circuit
from ..errors import EmptyHistogram, IncompleteCoverage, MissingSetting
from ..topology import Topology, best_path

SETTINGS = ((0.0, math.pi / 3), (0.0, 2 * math.pi / 3), (math.pi / 3, 2 * math.pi / 3))
DEFAULT_SHOTS = 8192


def setting_name(theta_a: float, theta_b: float) -> str:
    names = {0.0: "0", math.pi / 3: "pi/3", 2 * math.pi / 3: "2pi/3"}
    return f"{names.get(theta_a, repr(theta_a))},{names.get(theta_b, repr(theta_b))}"


def bell_circuit(path, theta_a: float, theta_b: float, n_qubits: int | None = None) -> Circuit:
    """Singlet between the path endpoints, then rotated Bell-basis readout.

    The opening X and H on the start qubit are fused into one gate, and so
    are the R rotation and closing H on each endpoint.
    """
    path = list(path)
    if len(path) < 2:
        raise ValueError("path needs at least two qubits")
    a, b = path[0], path[-1]
    c = Circuit(n_qubits if n_qubits is not None else max(path) + 1)
    c.add(G.H @ G.X, a, label="H·X")
    c.x(b)
    for u, v in zip(path[:-1], path[1:]):
        c.cnot(u, v)
    for u, v in reversed(list(zip(path[:-2], path[1:-1]))):
        c.cnot(u, v)
    c.add(G.H @ G.zpow(theta_a / math.pi), a, label="H·R_A")
    c.add(G.H @ G.zpow(theta_b / math.pi), b, label="H·R_B")
    c.measured = [a, b]
    return c


def correlation(hist) -> tuple:
    """(C, dC) from counts over the two measured endpoints."""
    n = hist.valid_shots
    if n <= 0:
        raise EmptyHistogram("no shots")
    p_eq = (hist.get("00") + hist.get("11")) / n
    p_eq = min(max(p_eq, 0.0), 1.0)
    return 2 * p_eq - 1, 2 * math.sqrt(p_eq * (1 - p_eq) / n)


@dataclass
class BellResult:
    pair: tuple
    c_01: float
    c_02: float
    c_12: float
    cbell: float
    stderr: float

    def to_json(self) -> dict:
        return {"pair": list(self.pair), "C(0,pi/3)": self.c_01, "C(0,2pi/3)": self.c_02,
                "C(pi/3,2pi/3)": self.c_12, "cbell": self.cbell, "stderr": self.stderr}


def cbell(results: dict, pair=(0, 1)) -> BellResult:
    """``results`` maps each setting tuple to (C, dC)."""
    missing = [s for s in SETTINGS if s not in results]
    if missing:
        raise MissingSetting(f"missing settings {missing}")
    (c01, e01), (c02, e02), (c12, e12) = (results[s] for s in SETTINGS)
    value = c02 - c01 - c12
    return BellResult(tuple(pair), c01, c02, c12, value, math.sqrt(e01**2 + e02**2 + e12**2))


def bell_score(per_pair: dict, topology: Topology) -> ScoreWithError:
    """Mean C_Bell over directed adjacent pairs; error sqrt(sum dC^2 / N)."""
    pairs = topology.directed_pairs()
    missing = [p for p in pairs if p not in per_pair]
    if missing:
        raise IncompleteCoverage(f"no results for pairs {missing}")
    vals = [per_pair[p].cbell for p in pairs]
    errs = [per_pair[p].stderr for p in pairs]
    n = len(pairs)
    return ScoreWithError(float(np.mean(vals)), math.sqrt(sum(e * e for e in errs) / n))


def job_key(a: int, b: int, k: int) -> str:
    return f"bell_{a}_{b}_s{k}"


def bell_jobs(topology: Topology, pairs="adjacent", shots: int = DEFAULT_SHOTS) -> list:
    if pairs == "adjacent":
        todo = topology.directed_pairs()
    elif pairs == "all":
        todo = [(a, b) for a in range(topology.n_qubits) for b in range(topology.n_qubits) if a != b]
    else:
        todo = list(pairs)
    jobs = []
    for a, b in todo:
        path = best_path(topology, a, b)
        for k, (ta, tb) in enumerate(SETTINGS):
            jobs.append(Job(job_key(a, b, k), bell_circuit(path, ta, tb, topology.n_qubits), shots))
    return jobs


def analyse(hists: dict, pairs) -> dict:
    out = {}
    for a, b in pairs:
        res = {s: correlation(hists[job_key(a, b, k)]) for k, s in enumerate(SETTINGS)}
        out[(a, b)] = cbell(res, (a, b))
    return out


def run_bell(topology: Topology, backend, pairs="adjacent", shots: int = DEFAULT_SHOTS):
    """Returns (per-pair results, device score, histograms)."""
    jobs = bell_jobs(topology, pairs, shots)
    hists = backend.run_many(jobs)
    done = sorted({(int(j.key.split("_")[1]), int(j.key.split("_")[2])) for j in jobs})
    per_pair = analyse(hists, done)
    return per_pair, bell_score(per_pair, topology), hists


def heatmap(per_pair: dict, n: int) -> np.ndarray:
    """n x n matrix of C_Bell (NaN on the diagonal and for missing pairs)."""
    m = np.full((n, n), np.nan)
    for (a, b), r in per_pair.items():
        m[a, b] = r.cbell
    return m
