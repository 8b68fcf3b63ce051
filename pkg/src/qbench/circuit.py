"""Gate-list circuit representation, metrics and JSON (de)serialization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gates as G
from .errors import MalformedJob


@dataclass(frozen=True)
class Gate:
    """A 1-qubit gate (``qubits == (q,)``) or a singly controlled gate
    (``qubits == (control, target)``) carrying the target's 2x2 matrix."""

    matrix: np.ndarray
    qubits: tuple
    label: str = "U"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if not G.is_unitary(m):
            raise ValueError(f"gate {self.label!r} is not unitary")
        qs = tuple(int(q) for q in self.qubits)
        if len(qs) not in (1, 2) or len(set(qs)) != len(qs):
            raise ValueError(f"bad qubit list {qs}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", qs)

    @property
    def controlled(self) -> bool:
        return len(self.qubits) == 2

    def dagger(self) -> "Gate":
        label = self.label[:-1] if self.label.endswith("†") else self.label + "†"
        return Gate(self.matrix.conj().T, self.qubits, label)

    def remap(self, mapping) -> "Gate":
        return Gate(self.matrix, tuple(mapping[q] for q in self.qubits), self.label)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    postselect: dict = field(default_factory=dict)
    measured: list = field(default_factory=list)
    basis_rotations: list = field(default_factory=list)

    def add(self, matrix, *qubits, label="U") -> "Circuit":
        gate = Gate(matrix, qubits, label)
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} outside width {self.n_qubits}")
        self.gates.append(gate)
        return self

    def extend(self, gate_list) -> "Circuit":
        for g in gate_list:
            self.add(g.matrix, *g.qubits, label=g.label)
        return self

    # named helpers keep circuit builders readable
    def h(self, q):
        return self.add(G.H, q, label="H")

    def x(self, q):
        return self.add(G.X, q, label="X")

    def s(self, q):
        return self.add(G.S, q, label="S")

    def sdg(self, q):
        return self.add(G.SDG, q, label="S†")

    def cnot(self, c, t):
        return self.add(G.X, c, t, label="CNOT")

    def cz(self, c, t):
        return self.add(G.Z, c, t, label="CZ")

    def all_gates(self, include_suffix: bool = True) -> list:
        return self.gates + (self.basis_rotations if include_suffix else [])

    def measure_all(self) -> "Circuit":
        self.measured = list(range(self.n_qubits))
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates), dict(self.postselect),
                       list(self.measured), list(self.basis_rotations))

    def unitary(self, include_suffix: bool = True) -> np.ndarray:
        """Dense matrix of the gate list (small circuits only)."""
        from .sim import simulate_basis_columns
        return simulate_basis_columns(self, include_suffix)


def depth(circuit: Circuit, include_suffix: bool = False) -> int:
    """ASAP layer count over qubit-disjointness."""
    level = [0] * circuit.n_qubits
    best = 0
    for g in circuit.all_gates(include_suffix):
        layer = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = layer
        best = max(best, layer)
    return best


def gate_count(circuit: Circuit, include_suffix: bool = False) -> int:
    return len(circuit.all_gates(include_suffix))


def cnot_count(circuit: Circuit) -> int:
    return sum(1 for g in circuit.gates if g.controlled and np.allclose(g.matrix, G.X))


def two_qubit_count(circuit: Circuit) -> int:
    return sum(1 for g in circuit.gates if g.controlled)


def concat(a: Circuit, b: Circuit) -> Circuit:
    if a.n_qubits != b.n_qubits:
        raise ValueError("width mismatch")
    out = a.copy()
    out.gates.extend(b.gates)
    return out


def _gate_to_json(g: Gate) -> dict:
    return {
        "label": g.label,
        "qubits": list(g.qubits),
        "matrix": [[float(v.real), float(v.imag)] for v in g.matrix.reshape(-1)],
    }


def _gate_from_json(rec: dict) -> Gate:
    m = np.array([complex(re, im) for re, im in rec["matrix"]]).reshape(2, 2)
    return Gate(m, tuple(rec["qubits"]), rec.get("label", "U"))


def circuit_to_json(c: Circuit) -> dict:
    return {
        "n_qubits": c.n_qubits,
        "gates": [_gate_to_json(g) for g in c.gates],
        "measured": list(c.measured),
        "postselect": {str(k): int(v) for k, v in sorted(c.postselect.items())},
        "basis_rotations": [_gate_to_json(g) for g in c.basis_rotations],
    }


def circuit_from_json(d: dict) -> Circuit:
    try:
        c = Circuit(int(d["n_qubits"]))
        for rec in d["gates"]:
            c.extend([_gate_from_json(rec)])
        c.measured = [int(q) for q in d.get("measured", [])]
        c.postselect = {int(k): int(v) for k, v in d.get("postselect", {}).items()}
        c.basis_rotations = [_gate_from_json(r) for r in d.get("basis_rotations", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedJob(f"invalid circuit record: {exc}") from exc
    return c
