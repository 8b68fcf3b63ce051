"""Schrödinger's Microscope and Mandelbrot benchmarks on Riemann-sphere encoded qubits."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .. import gates as G
from ..analysis import ScoreWithError, mean_with_error
from ..backends import Job
from ..circuit import Circuit
from ..errors import ResolutionMismatch

INF = complex(math.inf, 0.0)
DEFAULT_SHOTS = {1: 4096, 2: 4096, 3: 8192}
KINDS = ("microscope", "mandelbrot")


def is_inf(z) -> bool:
    return cmath.isinf(z) or cmath.isnan(z)


def psi(z) -> np.ndarray:
    """Normalized (z|0> + |1>), with psi(inf) = |0>."""
    if is_inf(z):
        return np.array([1.0, 0.0], dtype=complex)
    z = complex(z)
    if abs(z) > 1:
        v = np.array([1.0, 1.0 / z], dtype=complex)
    else:
        v = np.array([z, 1.0], dtype=complex)
    return v / np.linalg.norm(v)


def point_of_state(v) -> complex:
    """Inverse of ``psi`` (phase-insensitive)."""
    a, b = complex(v[0]), complex(v[1])
    if abs(b) < 1e-300:
        return INF
    return a / b


def prepare_psi(z) -> tuple:
    """Exponents (phi1, phi2) with Z^phi2 Y^phi1 |0> = |psi_z> up to phase."""
    if is_inf(z):
        return 0.0, 0.0
    z = complex(z)
    r = abs(z)
    phi1 = 2 / math.pi * math.acos(r / math.sqrt(r * r + 1))
    phi2 = -cmath.phase(z) / math.pi if r > 0 else 0.0
    return phi1, phi2


def mobius_of_unitary(u) -> tuple:
    u = np.asarray(u)
    return complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1])


def mobius_apply(coeffs, z) -> complex:
    a, b, c, d = coeffs
    if is_inf(z):
        return INF if c == 0 else a / c
    num, den = a * z + b, c * z + d
    if den == 0:
        return INF
    return num / den


def F_map(z) -> complex:
    if is_inf(z):
        return -1j
    w = complex(z) ** 2
    if is_inf(w):
        return -1j
    den = 1j * w + 1
    if den == 0:
        return INF
    return (w + 1j) / den


def G_map(z, c) -> complex:
    if is_inf(z):
        return INF
    w = complex(z) ** 2 + c
    return INF if is_inf(w) else w


def _square_branch_prob(w) -> float:
    """Post-selection probability of the squaring step on two copies of psi_w."""
    if is_inf(w):
        return 1.0
    a = abs(w)
    if a > 1:
        t = 1 / (a * a)
        return (1 + t * t) / (1 + t) ** 2
    return (a**4 + 1) / (a * a + 1) ** 2


def _add_prep(c: Circuit, q: int, z) -> None:
    phi1, phi2 = prepare_psi(z)
    c.add(G.ypow(phi1), q, label=f"Y^{phi1:.4f}")
    c.add(G.zpow(phi2), q, label=f"Z^{phi2:.4f}")


def _tree_pairs(n: int):
    """(level, control, target) in application order for the multiplexing tree."""
    for j in range(1, n + 1):
        stride = 1 << (j - 1)
        for k in range(1 << (n - j)):
            yield j, 2 * k * stride, 2 * k * stride + stride


def f_block(c: Circuit, u: int, v: int) -> None:
    c.cnot(u, v).s(u).h(u).s(u)


def microscope_circuit(n: int, z) -> Circuit:
    if n < 1:
        raise ValueError("level must be >= 1")
    width = 1 << n
    c = Circuit(width)
    for q in range(width):
        _add_prep(c, q, z)
    for _, u, v in _tree_pairs(n):
        f_block(c, u, v)
    c.measured = list(range(width))
    c.postselect = {q: 0 for q in range(1, width)}
    return c


def analytic_microscope(n: int, z) -> tuple:
    """(p_ps, p_1) for level n at input z."""
    orbit = [z]
    for _ in range(n):
        orbit.append(F_map(orbit[-1]))
    p_ps = 1.0
    for j in range(1, n + 1):
        p_ps *= _square_branch_prob(orbit[j - 1]) ** (1 << (n - j))
    w = orbit[n]
    p_1 = 0.0 if is_inf(w) else 1.0 / (abs(w) ** 2 + 1)
    return p_ps, p_1


def gc_parameters(c) -> tuple:
    """(r1, r2, phi) for the G_c block."""
    a = abs(c)
    r2 = a * math.sqrt(0.5 * (1 + math.sqrt(1 + 4 / (a * a))))
    return 1 / r2, r2, cmath.phase(c) / math.pi


def _controlled_reflection(circ: Circuit, ctrl: int, tgt: int, r: float, name: str) -> None:
    # R = Ry(2 beta) Z with cos(beta) = 1/sqrt(1+r^2)
    beta = math.atan2(r, 1.0)
    circ.cz(ctrl, tgt)
    circ.add(G.ry(2 * beta), ctrl, tgt, label=f"C-{name}")


def gc_block(circ: Circuit, u: int, v: int, c) -> None:
    """Append the G_c block; ``u`` keeps the result, ``v`` must read 0."""
    if c == 0:
        circ.cnot(u, v)
        return
    r1, r2, phi = gc_parameters(c)
    circ.cnot(u, v)
    circ.add(G.H, v, u, label="C-H")
    _controlled_reflection(circ, u, v, r1, "R1")
    circ.add(G.zpow(phi), u, label="Z^phi")
    circ.add(G.zpow(-phi), v, label="Z^-phi")
    circ.x(v)
    _controlled_reflection(circ, v, u, r2, "R2")
    # X on the target commutes with CNOT; placing it first lets the block end on both qubits
    circ.x(v)
    circ.cnot(u, v)


def Gc_circuit(c) -> Circuit:
    """Stand-alone two-qubit G_c block (no state preparation)."""
    circ = Circuit(2)
    gc_block(circ, 0, 1, c)
    circ.measured = [0, 1]
    circ.postselect = {1: 0}
    return circ


def mandelbrot_circuit(n: int, c) -> Circuit:
    if n < 1:
        raise ValueError("level must be >= 1")
    width = 1 << n
    circ = Circuit(width)
    for q in range(width):
        circ.x(q)
    for _, u, v in _tree_pairs(n):
        gc_block(circ, u, v, c)
    circ.measured = list(range(width))
    circ.postselect = {q: 0 for q in range(1, width)}
    return circ


_GC_CACHE: dict = {}


def _gc_unitary(c) -> np.ndarray:
    key = complex(c)
    if key not in _GC_CACHE:
        circ = Circuit(2)
        gc_block(circ, 0, 1, c)
        _GC_CACHE[key] = circ.unitary()
        if len(_GC_CACHE) > 4096:
            _GC_CACHE.clear()
    return _GC_CACHE[key]


def gc_step(w, c) -> tuple:
    """Branch probability and next orbit point of one G_c block on psi_w x psi_w."""
    u = _gc_unitary(c)
    v = psi(w)
    out = u @ np.kron(v, v)
    kept = out[[0, 2]]  # second qubit reads 0
    prob = float(np.vdot(kept, kept).real)
    return prob, G_map(w, c)


def analytic_mandelbrot(n: int, c) -> tuple:
    """(p_ps, p_1): per-step branch probabilities along the orbit of 0."""
    w = 0j
    p_ps = 1.0
    for j in range(1, n + 1):
        prob, w = gc_step(w, c)
        p_ps *= prob ** (1 << (n - j))
    p_1 = 0.0 if is_inf(w) else 1.0 / (abs(w) ** 2 + 1)
    return p_ps, p_1


def pixel_points(p: int) -> np.ndarray:
    """Complex pixel centres in image orientation (row 0 at Im = +2)."""
    coords = -2 + (np.arange(p) + 0.5) * 4 / p
    re = coords[None, :]
    im = coords[::-1][:, None]
    return re + 1j * im


def build_circuit(kind: str, n: int, point) -> Circuit:
    if kind == "microscope":
        return microscope_circuit(n, point)
    if kind == "mandelbrot":
        return mandelbrot_circuit(n, point)
    raise ValueError(f"unknown kind {kind!r}")


def oracle_grids(kind: str, n: int, resolution: int) -> tuple:
    """(geometric-mean post-selection grid, conditional success grid)."""
    fn = analytic_microscope if kind == "microscope" else analytic_mandelbrot
    m = (1 << n) - 1
    pts = pixel_points(resolution)
    ps = np.zeros((resolution, resolution))
    p1 = np.zeros((resolution, resolution))
    for r in range(resolution):
        for col in range(resolution):
            a, b = fn(n, complex(pts[r, col]))
            ps[r, col] = a ** (1 / m)
            p1[r, col] = b
    return ps, p1


@dataclass
class LevelRun:
    kind: str
    n: int
    resolution: int
    shots: float
    grid_ps: np.ndarray
    grid_1: np.ndarray
    valid: np.ndarray

    @property
    def m(self) -> int:
        return (1 << self.n) - 1

    def to_json(self) -> dict:
        return {"kind": self.kind, "level": self.n, "resolution": self.resolution,
                "shots": self.shots, "grid_ps": self.grid_ps.tolist(),
                "grid_1": self.grid_1.tolist(), "valid": self.valid.tolist()}


def pixel_key(kind: str, n: int, r: int, col: int) -> str:
    return f"{kind}_n{n}_r{r:03d}_c{col:03d}"


def grid_jobs(kind: str, n: int, resolution: int, shots) -> list:
    pts = pixel_points(resolution)
    return [Job(pixel_key(kind, n, r, col), build_circuit(kind, n, complex(pts[r, col])), shots)
            for r in range(resolution) for col in range(resolution)]


def level_from_histograms(kind, n, resolution, shots, hists) -> LevelRun:
    m = (1 << n) - 1
    ps = np.zeros((resolution, resolution))
    p1 = np.zeros((resolution, resolution))
    valid = np.zeros((resolution, resolution))
    for r in range(resolution):
        for col in range(resolution):
            h = hists[pixel_key(kind, n, r, col)]
            nv = h.valid_shots
            ones = sum(v for k, v in h.counts.items() if k[0] == "1")
            valid[r, col] = nv
            ps[r, col] = min(max(nv / h.shots, 0.0), 1.0) ** (1 / m)
            p1[r, col] = ones / nv if nv > 0 else 0.0
    return LevelRun(kind, n, resolution, shots, ps, p1, valid)


def run_grid(kind: str, n: int, resolution: int = 32, shots=None, backend=None) -> LevelRun:
    shots = DEFAULT_SHOTS.get(n, 8192) if shots is None else shots
    hists = backend.run_many(grid_jobs(kind, n, resolution, shots))
    return level_from_histograms(kind, n, resolution, shots, hists)


def _rms_with_error(diff: np.ndarray, delta: np.ndarray) -> ScoreWithError:
    P2 = diff.size
    score = float(np.sqrt(np.sum(diff**2) / P2))
    if score == 0:
        return ScoreWithError(0.0, 0.0)
    err = float(np.sqrt(np.sum((diff * delta) ** 2)) / (P2 * score))
    return ScoreWithError(score, err)


def score_grids(run: LevelRun, oracle_ps: np.ndarray, oracle_1: np.ndarray) -> tuple:
    """RMS scores of both grids with propagated binomial errors."""
    if oracle_ps.shape != run.grid_ps.shape or oracle_1.shape != run.grid_1.shape:
        raise ResolutionMismatch(f"{run.grid_ps.shape} vs {oracle_ps.shape}")
    m = run.m
    shots = float(run.shots)
    pm = run.grid_ps ** m
    d_pm = np.sqrt(pm * (1 - pm) / shots)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_p = np.where(run.grid_ps > 0, d_pm / (m * run.grid_ps ** (m - 1)), 0.0)
        q = run.grid_1
        d_q = np.where(pm > 0, np.sqrt(q * (1 - q) / (pm * shots)), 0.0)
    s_ps = _rms_with_error(run.grid_ps - oracle_ps, d_p)
    s_1 = _rms_with_error(run.grid_1 - oracle_1, d_q)
    return s_ps, s_1


def overall_riemann_score(level_scores) -> ScoreWithError:
    """Mean of (score_ps, score_1) over levels 1 and 2."""
    flat = [s for pair in level_scores for s in pair]
    return mean_with_error(flat)
