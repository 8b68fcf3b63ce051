import json
from functools import reduce
from pathlib import Path

import numpy as np
import pytest

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "qbench" / "schemas"


def dense_gate(gate, n):
    """Full 2^n x 2^n matrix of a gate, built with Kronecker products (qubit 0 = MSB)."""
    eye = np.eye(2, dtype=complex)
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    if len(gate.qubits) == 1:
        (q,) = gate.qubits
        return reduce(np.kron, [gate.matrix if k == q else eye for k in range(n)])
    c, t = gate.qubits
    off = reduce(np.kron, [p0 if k == c else eye for k in range(n)])
    on = reduce(np.kron, [p1 if k == c else (gate.matrix if k == t else eye) for k in range(n)])
    return off + on


def dense_unitary(circuit, include_suffix=True):
    n = circuit.n_qubits
    u = np.eye(1 << n, dtype=complex)
    for g in circuit.all_gates(include_suffix):
        u = dense_gate(g, n) @ u
    return u


def load_schema(name):
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


@pytest.fixture
def schema():
    return load_schema


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.delenv("QBENCH_THREADS", raising=False)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
