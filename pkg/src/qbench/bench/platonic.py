"""Platonic fractals from iterated weak Pauli measurements (octahedron scheme)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import gates as G
from ..analysis import ScoreWithError, mean_with_error
from ..backends import Job
from ..circuit import Circuit

DEFAULT_SHOTS = 131072
DEFAULT_STRENGTH = 0.75
FINAL_BASES = ("Y", "Z")
_AXIS = {"X": 0, "Y": 1, "Z": 2}
# maps the +1/-1 eigenstates of each Pauli onto |0>/|1>
_TO_Z = {"X": G.H, "Y": G.H @ G.SDG, "Z": G.I2}


@dataclass(frozen=True)
class WeakMeasSpec:
    strength: float
    basis: str = "Z"

    def __post_init__(self):
        if not 0 < self.strength <= 1:
            raise ValueError("strength must lie in (0, 1]")
        if self.basis not in _AXIS:
            raise ValueError(f"bad basis {self.basis!r}")

    @property
    def theta(self) -> float:
        return math.acos(math.sqrt((1 + self.strength) / 2))

    @property
    def k(self) -> float:
        s = self.strength
        return (1 - math.sqrt(1 - s * s)) / s


def weak_block(c: Circuit, system: int, ancilla: int, theta: float) -> None:
    """e^{i theta X} if the system reads 0, e^{i(pi/2 - theta) X} if it reads 1."""
    c.add(G.exp_x(theta), ancilla, label="e^{i theta X}")
    c.add(G.exp_x(math.pi / 2 - 2 * theta), system, ancilla, label="C-e^{iX}")


def weak_circuit(spec: WeakMeasSpec) -> Circuit:
    """Two-qubit block: qubit 0 = ancilla (measured), qubit 1 = system."""
    c = Circuit(2)
    v = _TO_Z[spec.basis]
    if spec.basis != "Z":
        c.add(v, 1, label=f"to-{spec.basis}")
    weak_block(c, 1, 0, spec.theta)
    if spec.basis != "Z":
        c.add(v.conj().T, 1, label=f"from-{spec.basis}")
    c.measured = [0]
    return c


def bloch_update(r, basis: str, outcome: int, s: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    k = (1 - math.sqrt(1 - s * s)) / s
    n = np.zeros(3)
    n[_AXIS[basis]] = (-1) ** outcome
    nr = float(n @ r)
    return ((1 - k * k) * r + 2 * k * (1 + k * nr) * n) / (1 + k * k + 2 * k * nr)


def expected_trajectory(bases, outcomes, s: float) -> list:
    pts = [np.array([1.0, 0.0, 0.0])]
    for b, o in zip(bases, outcomes):
        pts.append(bloch_update(pts[-1], b, int(o), s))
    return pts


def bloch_vector(state) -> np.ndarray:
    a, b = state
    rho01 = a * np.conj(b)
    return np.array([2 * rho01.real, -2 * rho01.imag, abs(a) ** 2 - abs(b) ** 2]) / (abs(a) ** 2 + abs(b) ** 2)


def platonic_circuit(bases: str, final: str, s: float) -> Circuit:
    """System qubit 0 starts in |+>; ancilla j+1 records step j.

    Consecutive basis changes are fused into one gate per step.
    """
    d = len(bases)
    theta = WeakMeasSpec(s).theta
    c = Circuit(d + 1)
    prev = G.H  # prepares |+>
    for j, b in enumerate(bases):
        c.add(_TO_Z[b] @ prev, 0, label=f"rot-{b}")
        weak_block(c, 0, j + 1, theta)
        prev = _TO_Z[b].conj().T
    c.add(_TO_Z[final] @ prev, 0, label=f"final-{final}")
    c.measured = list(range(d + 1))
    return c


def basis_sequences(d: int) -> list:
    return ["".join(p) for p in itertools.product("XYZ", repeat=d)]


def job_key(bases: str, final: str) -> str:
    return f"platonic_{bases}_{final}"


def platonic_jobs(d: int, s: float, shots: int) -> list:
    return [Job(job_key(seq, f), platonic_circuit(seq, f, s), shots)
            for seq in basis_sequences(d) for f in FINAL_BASES]


@dataclass
class PlatonicResult:
    depth: int
    strength: float
    labels: list       # (bases, outcome bits)
    measured: np.ndarray   # (L, 2) -> (y, z)
    expected: np.ndarray   # (L, 2)
    probability: np.ndarray
    low_stats: list
    score: ScoreWithError

    def to_json(self) -> dict:
        return {
            "depth": self.depth, "strength": self.strength, "score": self.score.to_json(),
            "points": [{"bases": b, "outcomes": o, "measured": m.tolist(), "expected": e.tolist(),
                        "probability": float(p), "low_statistics": bool(f)}
                       for (b, o), m, e, p, f in zip(self.labels, self.measured, self.expected,
                                                     self.probability, self.low_stats)],
        }


def platonic_score(measured, expected) -> ScoreWithError:
    dist = np.linalg.norm(np.asarray(measured) - np.asarray(expected), axis=1)
    err = float(dist.std(ddof=1)) if len(dist) > 1 else 0.0
    return ScoreWithError(float(dist.mean()), err)


def analyse(d: int, s: float, hists: dict, min_shots: int = 16) -> PlatonicResult:
    labels, meas, exp, prob, low = [], [], [], [], []
    for seq in basis_sequences(d):
        comps, support = {}, {}
        for f in FINAL_BASES:
            h = hists[job_key(seq, f)]
            ones, tot = {}, {}
            for key, cnt in h.counts.items():
                o = key[1:]
                tot[o] = tot.get(o, 0) + cnt
                if key[0] == "1":
                    ones[o] = ones.get(o, 0) + cnt
            comps[f] = {o: 1 - 2 * ones.get(o, 0) / t for o, t in tot.items() if t > 0}
            support[f] = (tot, h.shots)
        for bits in itertools.product("01", repeat=d):
            o = "".join(bits)
            y = comps["Y"].get(o, 0.0)
            z = comps["Z"].get(o, 0.0)
            end = expected_trajectory(seq, o, s)[-1]
            n_y = support["Y"][0].get(o, 0)
            n_z = support["Z"][0].get(o, 0)
            labels.append((seq, o))
            meas.append((y, z))
            exp.append((end[1], end[2]))
            prob.append(0.5 * (n_y / support["Y"][1] + n_z / support["Z"][1]))
            low.append(min(n_y, n_z) < min_shots)
    meas, exp = np.array(meas), np.array(exp)
    return PlatonicResult(d, s, labels, meas, exp, np.array(prob), low, platonic_score(meas, exp))


def run_platonic(d: int, backend, s: float = DEFAULT_STRENGTH, shots: int = DEFAULT_SHOTS) -> PlatonicResult:
    return analyse(d, s, backend.run_many(platonic_jobs(d, s, shots)))


def overall_platonic_score(scores) -> ScoreWithError:
    return mean_with_error(scores)
