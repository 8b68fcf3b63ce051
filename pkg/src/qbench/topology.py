"""Device interaction graphs and fidelity-aware routing."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, NoPath


@dataclass
class Topology:
    n_qubits: int
    edges: dict = field(default_factory=dict)  # (a, b) -> fidelity
    one_qubit_fidelity: list = field(default_factory=list)

    def __post_init__(self):
        for (a, b), f in self.edges.items():
            if not (0 < f <= 1):
                raise ConfigError(f"edge fidelity {f} outside (0, 1]")
            if a == b or not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ConfigError(f"bad edge ({a}, {b})")
        if not self.one_qubit_fidelity:
            self.one_qubit_fidelity = [1.0] * self.n_qubits
        if any(not (0 < f <= 1) for f in self.one_qubit_fidelity):
            raise ConfigError("one-qubit fidelities must lie in (0, 1]")

    def fidelity(self, a: int, b: int) -> float:
        if (a, b) in self.edges:
            return self.edges[(a, b)]
        return self.edges[(b, a)]

    def neighbours(self, q: int) -> list:
        out = {b for a, b in self.edges if a == q} | {a for a, b in self.edges if b == q}
        return sorted(out)

    def directed_pairs(self) -> list:
        """Both orientations of every connected pair."""
        pairs = set()
        for a, b in self.edges:
            pairs.add((a, b))
            pairs.add((b, a))
        return sorted(pairs)

    @classmethod
    def line(cls, n: int, fidelity: float = 1.0) -> "Topology":
        return cls(n, {(i, i + 1): fidelity for i in range(n - 1)})

    @classmethod
    def from_json(cls, data: dict) -> "Topology":
        try:
            edges = {(int(e["a"]), int(e["b"])): float(e["fidelity"]) for e in data["edges"]}
            return cls(int(data["n"]), edges, [float(f) for f in data.get("q1_fidelity", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid topology: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Topology":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {
            "n": self.n_qubits,
            "edges": [{"a": a, "b": b, "fidelity": f} for (a, b), f in sorted(self.edges.items())],
            "q1_fidelity": list(self.one_qubit_fidelity),
        }


def _distances(topo: Topology, src: int) -> dict:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in topo.neighbours(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def best_path(topo: Topology, a: int, b: int) -> list:
    """Shortest path from a to b with the largest summed edge fidelity.

    Equal sums fall back to the lexicographically smallest qubit sequence.
    """
    if a == b:
        raise ValueError("endpoints must differ")
    dist = _distances(topo, b)
    if a not in dist:
        raise NoPath(f"qubits {a} and {b} are not connected")
    # best[u] = (fidelity sum, path u..b) restricted to shortest paths
    best = {b: (0.0, [b])}
    for d in range(1, dist[a] + 1):
        for u in sorted(q for q, k in dist.items() if k == d):
            cand = None
            for v in topo.neighbours(u):
                if dist.get(v) != d - 1:
                    continue
                score = topo.fidelity(u, v) + best[v][0]
                path = [u] + best[v][1]
                if (cand is None or score > cand[0] + 1e-12
                        or (abs(score - cand[0]) <= 1e-12 and path < cand[1])):
                    cand = (score, path)
            best[u] = cand
    return best[a][1]
