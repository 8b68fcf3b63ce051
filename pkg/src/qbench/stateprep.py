"""Arbitrary state preparation with 2^n - n - 1 CNOTs.

A uniformly controlled gate (UCG) over k controls is decomposed, up to a
diagonal, into 2^k single-qubit gates and 2^k - 1 CNOTs. The state is
prepared by inverting a sequence of disentangling UCGs.

The decomposition works in a frame where entanglers are CZ gates: each
demultiplexing step emits a diagonal that commutes through every CZ and is
merged into the next block. Only at the end are CZs rewritten as
H-CNOT-H with the Hadamards folded into neighbouring gates.
"""
from __future__ import annotations

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate
from .errors import NormViolation


def _demultiplex(a: np.ndarray, b: np.ndarray):
    """Return (r, u, v) with a = r* u D v and b = r u D* v, D = diag(e^{i pi/4}, e^{-i pi/4}).

    ``r`` is returned as its two diagonal entries.
    """
    x = a @ b.conj().T
    phi = np.angle(np.linalg.det(x))
    if abs(x[0, 0]) > 1e-13:
        alpha = np.angle(-x[1, 1] / x[0, 0]) / 2
    else:
        alpha = 0.0
    r = np.array([np.exp(1j * (-phi / 4 + alpha / 2)), np.exp(1j * (-phi / 4 - alpha / 2))])
    y = r[:, None] * x * r[None, :]
    m = y - 1j * np.eye(2)
    row = m[0] if np.linalg.norm(m[0]) >= np.linalg.norm(m[1]) else m[1]
    e1 = np.array([row[1], -row[0]])
    e1 /= np.linalg.norm(e1)
    e2 = np.array([-np.conj(e1[1]), np.conj(e1[0])])
    u = np.column_stack([e1, e2])
    d = np.array([np.exp(0.25j * np.pi), np.exp(-0.25j * np.pi)])
    v = d[:, None] * (u.conj().T @ (r.conj()[:, None] * b))
    return r, u, v


def ucg_decompose(unitaries) -> tuple:
    """Decompose a UCG into alternating single-qubit gates and CNOTs.

    ``unitaries[x]`` acts on the target when the controls read ``x`` (first
    control = most significant bit). Returns ``(singles, ctrl_index)`` where
    the circuit is singles[0], CNOT(ctrl_index[0]), singles[1], ... and
    ``ctrl_index`` refers to positions in the control list. The circuit
    equals the UCG up to a diagonal applied afterwards.
    """
    blocks = [np.array(unitaries, dtype=complex)]
    k = int(np.log2(len(blocks[0])))
    if 1 << k != len(blocks[0]):
        raise ValueError("number of unitaries must be a power of two")
    between: list = []  # control position of the CZ between consecutive blocks
    for level in range(k):
        half = blocks[0].shape[0] // 2
        new_blocks, new_between = [], []
        carry = None
        for bi, blk in enumerate(blocks):
            if carry is not None:
                blk = blk * carry[:, None, :]
            vs, us = [], []
            rdiag = np.empty((2 * half, 2), dtype=complex)
            for xp in range(half):
                r, u, v = _demultiplex(blk[xp], blk[xp + half])
                vs.append(v)
                us.append(u @ G.SDG)
                rdiag[xp] = r.conj()
                rdiag[xp + half] = r
            carry = rdiag
            if bi > 0:
                new_between.append(between[bi - 1])
            new_blocks.extend([np.array(vs), np.array(us)])
            new_between.append(level)
        blocks, between = new_blocks, new_between
    singles = [b[0] for b in blocks]
    out = []
    last = len(singles) - 1
    for i, g in enumerate(singles):
        if i == 0:
            g = G.H @ g if last > 0 else g
        elif i == last:
            g = g @ G.H
        else:
            g = G.H @ g @ G.H
        out.append(g)
    return out, between


def _ucg_circuit(width: int, controls, target: int, unitaries) -> list:
    singles, ctrl_index = ucg_decompose(unitaries)
    tmp = Circuit(width)
    for i, g in enumerate(singles):
        tmp.add(g, target, label="U")
        if i < len(ctrl_index):
            tmp.cnot(controls[ctrl_index[i]], target)
    return tmp.gates


def _zeroing_unitary(a: complex, b: complex) -> np.ndarray:
    r = np.hypot(abs(a), abs(b))
    if r < 1e-15:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(a), np.conj(b)], [-b, a]], dtype=complex) / r


def state_prep_circuit(amplitudes, n: int | None = None) -> Circuit:
    """Circuit mapping |0...0> to ``amplitudes`` up to a global phase."""
    psi = np.array(amplitudes, dtype=complex).reshape(-1)
    if n is None:
        n = int(round(np.log2(len(psi))))
    if len(psi) != 1 << n:
        raise ValueError("amplitude count must be 2^n")
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise NormViolation(f"state norm {np.linalg.norm(psi):.12f} != 1")
    steps = []  # disentangling gate lists, first step acts on the last qubit
    cur = psi.copy()
    for t in range(n - 1, -1, -1):
        pairs = cur.reshape(-1, 2)
        us = np.array([_zeroing_unitary(a, b) for a, b in pairs])
        gate_list = _ucg_circuit(n, list(range(t)), t, us)
        sub = Circuit(t + 1)
        sub.extend(gate_list)
        out = _apply_small(sub, cur)
        steps.append(gate_list)
        cur = out.reshape(-1, 2)[:, 0].copy()
    circ = Circuit(n)
    for gate_list in reversed(steps):
        for g in reversed(gate_list):
            circ.add(g.matrix.conj().T, *g.qubits, label=g.label if g.controlled else "U")
    circ.measured = list(range(n))
    return circ


def _apply_small(c: Circuit, vec: np.ndarray) -> np.ndarray:
    from .sim import simulate
    return simulate(c, initial=vec).amplitudes
