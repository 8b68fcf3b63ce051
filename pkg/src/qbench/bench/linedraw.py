"""Line Drawing benchmark: curves as QFT-encoded states, recovered by Pauli tomography."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import gates as G
from ..analysis import ScoreWithError, mean_with_error
from ..backends import Job
from ..circuit import Circuit, Gate
from ..errors import IncompleteBatch
from ..sim import simulate
from ..stateprep import state_prep_circuit

KITE = (1 + 0j, 0.4j, -0.55 + 0j, -1j)
DEFAULT_SHOTS = 4096
DEFAULT_BATCHES = 25


def normalize(points) -> np.ndarray:
    z = np.asarray(points, dtype=complex)
    return z / np.linalg.norm(z)


def heart(n_points: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(n_points) / n_points
    x = 16 * np.sin(t) ** 3
    y = 13 * np.cos(t) - 5 * np.cos(2 * t) - 2 * np.cos(3 * t) - np.cos(4 * t)
    return x + 1j * y


def reference_curves() -> dict:
    return {"kite": normalize(KITE), "heart8": normalize(heart(8)), "heart16": normalize(heart(16))}


def _check_size(n_points: int) -> int:
    n = int(round(math.log2(n_points))) if n_points > 0 else 0
    if n_points < 4 or 1 << n != n_points:
        raise ValueError("curve needs a power-of-two number (>= 4) of points")
    return n


def fourier_coefficients(points) -> np.ndarray:
    """c with sum_j c_j e^{2 pi i j t / N} proportional to z_t, unit norm."""
    z = np.asarray(points, dtype=complex)
    _check_size(len(z))
    return normalize(np.fft.fft(z) / len(z))


def qft_circuit(n: int) -> Circuit:
    """Swap-free QFT; the output register is read in reversed qubit order."""
    c = Circuit(n)
    for j in range(n):
        c.h(j)
        for m in range(j + 1, n):
            k = m - j + 1
            c.add(G.qft_r(k), m, j, label=f"C-R{k}")
    return c


def bit_reverse_permutation(n: int) -> np.ndarray:
    return np.array([int(format(i, f"0{n}b")[::-1], 2) for i in range(1 << n)])


def pauli_measure_circuit(pauli: str, qubits=None) -> list:
    """Basis-rotation suffix that maps each Pauli's eigenbasis to Z."""
    qubits = list(range(len(pauli))) if qubits is None else list(qubits)
    out = []
    for q, p in zip(qubits, pauli):
        if p == "X":
            out.append(Gate(G.H, (q,), "H"))
        elif p == "Y":
            out.append(Gate(G.SDG, (q,), "S†"))
            out.append(Gate(G.H, (q,), "H"))
        elif p != "Z":
            raise ValueError(f"bad Pauli letter {p!r}")
    return out


def pauli_strings(n: int) -> list:
    return ["".join(s) for s in itertools.product("XYZ", repeat=n)]


def curve_circuit(points) -> Circuit:
    """State preparation of the Fourier coefficients followed by the QFT."""
    coeffs = fourier_coefficients(points)
    n = _check_size(len(coeffs))
    c = state_prep_circuit(coeffs, n)
    c.gates.extend(qft_circuit(n).gates)
    c.measured = list(range(n))
    return c


# single-qubit eigenstates: (basis, outcome bit) -> ket
_EIGEN = {
    ("X", 0): np.array([1, 1]) / np.sqrt(2), ("X", 1): np.array([1, -1]) / np.sqrt(2),
    ("Y", 0): np.array([1, 1j]) / np.sqrt(2), ("Y", 1): np.array([1, -1j]) / np.sqrt(2),
    ("Z", 0): np.array([1, 0]), ("Z", 1): np.array([0, 1]),
}


@lru_cache(maxsize=None)
def _snapshot(basis: str, bit: int) -> np.ndarray:
    v = np.asarray(_EIGEN[(basis, bit)], dtype=complex)
    return 3 * np.outer(v, v.conj()) - np.eye(2)


@dataclass
class DensityEstimate:
    L: np.ndarray
    vector: np.ndarray
    eigenvalue: float


@dataclass
class TomographyBatch:
    n: int
    hists: dict  # Pauli string -> CountsHistogram over the n qubits

    def check(self):
        missing = [s for s in pauli_strings(self.n) if s not in self.hists]
        if missing:
            raise IncompleteBatch(f"missing Pauli strings: {missing[:5]}")
        shots = {h.shots for h in self.hists.values()}
        if len(shots) != 1:
            raise IncompleteBatch("unequal shot counts across Pauli strings")


def _top_eigenpair(L: np.ndarray) -> tuple:
    w, v = np.linalg.eigh(L)
    top = w[-1]
    cands = [v[:, i] for i in range(len(w)) if abs(w[i] - top) <= 1e-12]
    # deterministic tie-break and phase: largest-magnitude first component
    vec = max(cands, key=lambda x: (round(abs(x[0]), 12), tuple(np.round(np.abs(x), 12))))
    k = int(np.argmax(np.abs(vec) > 1e-12))
    vec = vec * np.exp(-1j * np.angle(vec[k]))
    return float(top), vec


def estimate_state(batch: TomographyBatch) -> DensityEstimate:
    batch.check()
    n = batch.n
    dim = 1 << n
    L = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    for pauli in pauli_strings(n):
        h = batch.hists[pauli]
        for key, cnt in h.counts.items():
            if cnt == 0:
                continue
            term = np.ones((1, 1), dtype=complex)
            for q in range(n):
                term = np.kron(term, _snapshot(pauli[q], int(key[q])))
            L += cnt * term
        total += h.shots
    L /= total
    L = (L + L.conj().T) / 2
    val, vec = _top_eigenpair(L)
    return DensityEstimate(L, vec, val)


def align_and_score(target, estimate, purity: float) -> tuple:
    """Return (score, estimate rotated onto the target's global phase)."""
    psi = normalize(target)
    est = normalize(estimate)
    overlap = np.vdot(est, psi)
    rotated = est * (np.exp(1j * np.angle(overlap)) if abs(overlap) > 0 else 1)
    dist = math.sqrt(max(2 - 2 * abs(overlap), 0.0))
    p = min(max(purity, 0.0), 1.0)
    return (1 - math.sqrt(p)) + math.sqrt(p) * dist, rotated


def job_key(curve_name: str, batch: int, pauli: str) -> str:
    return f"line_{curve_name}_b{batch:02d}_{pauli}"


def tomography_jobs(curve_name: str, points, batches: int, shots: int) -> list:
    base = curve_circuit(points)
    n = base.n_qubits
    # output qubit order is reversed: measure qubit n-1 first
    order = list(range(n - 1, -1, -1))
    jobs = []
    for b in range(batches):
        for pauli in pauli_strings(n):
            c = base.copy()
            c.basis_rotations = pauli_measure_circuit(pauli, order)
            c.measured = order
            jobs.append(Job(job_key(curve_name, b, pauli), c, shots))
    return jobs


@dataclass
class LineResult:
    name: str
    score: ScoreWithError
    batch_scores: list
    target: np.ndarray
    estimates: list  # rotated estimates per batch

    def to_json(self) -> dict:
        return {"curve": self.name, "score": self.score.to_json(), "batch_scores": self.batch_scores,
                "target": [[z.real, z.imag] for z in self.target],
                "estimate": [[z.real, z.imag] for z in self.estimates[0]] if self.estimates else []}


def analyse(curve_name: str, points, batches: int, hists: dict) -> LineResult:
    target = normalize(points)
    n = _check_size(len(target))
    scores, rotated = [], []
    for b in range(batches):
        batch = TomographyBatch(n, {p: hists[job_key(curve_name, b, p)] for p in pauli_strings(n)})
        est = estimate_state(batch)
        s, rot = align_and_score(target, est.vector, est.eigenvalue)
        scores.append(float(s))
        rotated.append(rot)
    arr = np.asarray(scores)
    err = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return LineResult(curve_name, ScoreWithError(float(arr.mean()), err), scores, target, rotated)


def run_linedraw(curve_name: str, points, backend, batches: int = DEFAULT_BATCHES,
                 shots: int = DEFAULT_SHOTS) -> LineResult:
    jobs = tomography_jobs(curve_name, points, batches, shots)
    return analyse(curve_name, points, batches, backend.run_many(jobs))


def overall_line_score(score4: ScoreWithError, score8: ScoreWithError) -> ScoreWithError:
    return mean_with_error([score4, score8])
