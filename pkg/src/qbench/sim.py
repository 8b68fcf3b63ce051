"""Dense statevector simulation, sampling, post-selection and trajectory noise."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate
from .errors import ConfigError, WidthExceeded, ZeroBranch
from .kernels import apply_1q, apply_controlled

MAX_QUBITS = 24


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


@dataclass
class CountsHistogram:
    shots: float
    counts: dict = field(default_factory=dict)

    @property
    def valid_shots(self) -> float:
        return sum(self.counts.values())

    def get(self, key: str):
        return self.counts.get(key, 0)

    def to_json(self) -> dict:
        return {"shots": self.shots, "counts": {k: self.counts[k] for k in sorted(self.counts)}}

    @classmethod
    def from_json(cls, d: dict) -> "CountsHistogram":
        return cls(d["shots"], dict(d["counts"]))


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    ro01: float = 0.0
    ro10: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "ro01", "ro10"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"noise parameter {name}={v} outside [0, 1]")

    @classmethod
    def load(cls, path) -> "NoiseModel":
        with open(path) as fh:
            d = json.load(fh)
        try:
            return cls(float(d.get("p1", 0)), float(d.get("p2", 0)),
                       float(d.get("ro01", 0)), float(d.get("ro10", 0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid noise file: {exc}") from exc

    def to_json(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "ro01": self.ro01, "ro10": self.ro10}


def derive_seed(root: int, *key) -> int:
    """Stable 64-bit stream seed for (key, root)."""
    text = json.dumps([int(root), [str(k) for k in key]])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def apply_gate(amps: np.ndarray, n: int, gate: Gate) -> None:
    m = np.ascontiguousarray(gate.matrix)
    if gate.controlled:
        apply_controlled(amps, n, gate.qubits[0], gate.qubits[1], m)
    else:
        apply_1q(amps, n, gate.qubits[0], m)


def _check_width(n: int) -> None:
    if n > MAX_QUBITS:
        raise WidthExceeded(f"{n} qubits exceeds the limit of {MAX_QUBITS}")


def simulate(circuit: Circuit, include_suffix: bool = True, initial=None) -> StateVector:
    """Apply the gate list to |0...0> (or ``initial``)."""
    n = circuit.n_qubits
    _check_width(n)
    if initial is None:
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
    else:
        amps = np.array(initial, dtype=complex)
    for g in circuit.all_gates(include_suffix):
        apply_gate(amps, n, g)
    return StateVector(n, amps)


def simulate_basis_columns(circuit: Circuit, include_suffix: bool = True) -> np.ndarray:
    n = circuit.n_qubits
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1
        out[:, j] = simulate(circuit, include_suffix, e).amplitudes
    return out


def marginal(amps: np.ndarray, n: int, qubits) -> np.ndarray:
    """Born distribution over ``qubits`` (first listed qubit = most significant)."""
    qubits = list(qubits)
    probs = (np.abs(amps) ** 2).reshape([2] * n)
    rest = tuple(q for q in range(n) if q not in qubits)
    if rest:
        probs = probs.sum(axis=rest)
    kept = [q for q in range(n) if q in qubits]
    probs = np.transpose(probs, [kept.index(q) for q in qubits]) if qubits else probs
    return np.asarray(probs).reshape(-1)


def probabilities(state: StateVector, qubits=None) -> dict:
    qubits = list(range(state.n_qubits)) if qubits is None else list(qubits)
    p = marginal(state.amplitudes, state.n_qubits, qubits)
    m = len(qubits)
    return {format(i, f"0{m}b") if m else "": float(v) for i, v in enumerate(p) if v > 0}


def postselect_state(state: StateVector, qubit: int, bit: int):
    """Project ``qubit`` onto ``bit``; return (renormalized state, branch probability)."""
    n = state.n_qubits
    view = state.amplitudes.reshape([2] * n)
    idx = [slice(None)] * n
    idx[qubit] = 1 - bit
    out = view.copy()
    out[tuple(idx)] = 0
    out = out.reshape(-1)
    prob = float(np.vdot(out, out).real)
    if prob < 1e-14:
        raise ZeroBranch(f"branch qubit {qubit}={bit} has probability {prob:.3g}")
    return StateVector(n, out / np.sqrt(prob)), prob


def _measured_list(circuit: Circuit, measured=None) -> list:
    if measured is not None:
        return list(measured)
    if circuit is not None and circuit.measured:
        return list(circuit.measured)
    raise ValueError("no measured qubits given")


def _bits_table(m: int) -> list:
    return [format(i, f"0{m}b") if m else "" for i in range(1 << m)]


def _filter(measured, postselect):
    checks = [(measured.index(q), str(b)) for q, b in postselect.items()]

    def ok(key):
        return all(key[i] == b for i, b in checks)

    return ok


def _counts_from_indices(idx_counts: np.ndarray, measured, postselect, shots) -> CountsHistogram:
    keys = _bits_table(len(measured))
    ok = _filter(measured, postselect)
    counts = {}
    for i in np.nonzero(idx_counts)[0]:
        key = keys[i]
        if ok(key):
            counts[key] = int(idx_counts[i])
    return CountsHistogram(int(shots), counts)


def _check_postselect(measured, postselect):
    missing = [q for q in postselect if q not in measured]
    if missing:
        raise ValueError(f"post-selected qubits {missing} are not measured")


def sample(state: StateVector, shots: int, postselect=None, seed: int = 0,
           measured=None) -> CountsHistogram:
    """Draw ``shots`` i.i.d. outcomes over ``measured`` qubits (default: all)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    postselect = dict(postselect or {})
    measured = list(range(state.n_qubits)) if measured is None else list(measured)
    _check_postselect(measured, postselect)
    p = marginal(state.amplitudes, state.n_qubits, measured)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    return _counts_from_indices(rng.multinomial(shots, p), measured, postselect, shots)


def exact_counts(state: StateVector, shots: float, postselect=None, measured=None) -> CountsHistogram:
    """Expected (real-valued) counts at ``shots`` nominal shots."""
    postselect = dict(postselect or {})
    measured = list(range(state.n_qubits)) if measured is None else list(measured)
    _check_postselect(measured, postselect)
    p = marginal(state.amplitudes, state.n_qubits, measured)
    keys = _bits_table(len(measured))
    ok = _filter(measured, postselect)
    counts = {keys[i]: float(p[i] * shots) for i in range(len(p)) if p[i] > 0 and ok(keys[i])}
    return CountsHistogram(shots, counts)


def _noise_slots(circuit: Circuit, noise: NoiseModel):
    """One (gate index, qubit, probability) slot per gate-touched qubit."""
    slots = []
    for gi, g in enumerate(circuit.all_gates(True)):
        p = noise.p2 if g.controlled else noise.p1
        if p > 0:
            for q in g.qubits:
                slots.append((gi, q, p))
    return slots


_PAULI_LIST = (None, G.X, G.Y, G.Z)


def sample_noisy(circuit: Circuit, noise: NoiseModel, shots: int, seed: int,
                 measured=None, postselect=None) -> CountsHistogram:
    """Monte-Carlo Pauli-trajectory sampling with readout flips.

    Shots sharing the same error pattern are simulated once; the clean
    prefix up to the first error is reused.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = circuit.n_qubits
    _check_width(n)
    measured = _measured_list(circuit, measured)
    postselect = dict(circuit.postselect if postselect is None else postselect)
    _check_postselect(measured, postselect)
    rng = np.random.default_rng(seed)
    gate_list = circuit.all_gates(True)
    slots = _noise_slots(circuit, noise)

    if slots:
        probs = np.array([s[2] for s in slots])
        hit = rng.random((shots, len(slots))) < probs
        which = rng.integers(1, 4, size=(shots, len(slots)))
        events = np.where(hit, which, 0).astype(np.int8)
        patterns, inverse, mult = np.unique(events, axis=0, return_inverse=True, return_counts=True)
    else:
        patterns = np.zeros((1, 0), dtype=np.int8)
        inverse = np.zeros(shots, dtype=np.int64)
        mult = np.array([shots])
    inverse = np.asarray(inverse).reshape(-1)

    # clean prefix states: prefix[k] = state after the first k gates
    prefix = [np.zeros(1 << n, dtype=complex)]
    prefix[0][0] = 1.0
    for g in gate_list:
        nxt = prefix[-1].copy()
        apply_gate(nxt, n, g)
        prefix.append(nxt)

    n_out = 1 << len(measured)
    outcomes = np.empty(shots, dtype=np.int64)
    order = np.argsort(inverse, kind="stable")
    groups = np.split(order, np.cumsum(mult)[:-1])
    for pat, members in zip(patterns, groups):
        active = np.nonzero(pat)[0]
        if active.size == 0:
            amps = prefix[-1]
        else:
            errs = {}
            for si in active:
                gi, q, _ = slots[si]
                errs.setdefault(gi, []).append((q, _PAULI_LIST[pat[si]]))
            first = min(errs)
            amps = prefix[first + 1].copy()
            for gi in range(first, len(gate_list)):
                if gi > first:
                    apply_gate(amps, n, gate_list[gi])
                for q, pm in errs.get(gi, ()):
                    apply_1q(amps, n, q, np.ascontiguousarray(pm))
        p = marginal(amps, n, measured)
        p = p / p.sum()
        outcomes[members] = rng.choice(n_out, size=members.size, p=p)

    if noise.ro01 > 0 or noise.ro10 > 0:
        m = len(measured)
        shifts = np.arange(m - 1, -1, -1)
        bits = (outcomes[:, None] >> shifts) & 1
        u = rng.random(bits.shape)
        flip = np.where(bits == 0, u < noise.ro01, u < noise.ro10)
        bits = bits ^ flip
        outcomes = (bits << shifts).sum(axis=1)

    idx_counts = np.bincount(outcomes, minlength=n_out)
    return _counts_from_indices(idx_counts, measured, postselect, shots)
