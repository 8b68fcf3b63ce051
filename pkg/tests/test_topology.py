import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import shortest_path

from qbench.errors import NoPath
from qbench.topology import Topology, best_path


def bell_figure_topology():
    edges = {(0, 1): 0.95, (1, 2): 0.99, (2, 3): 0.99, (1, 4): 0.90, (4, 3): 0.90}
    return Topology(5, edges)


def test_adjacent_pair():
    assert best_path(Topology.line(5), 0, 1) == [0, 1]
    assert best_path(Topology.line(5), 1, 0) == [1, 0]


def test_figure_route_prefers_high_fidelity():
    assert best_path(bell_figure_topology(), 0, 3) == [0, 1, 2, 3]


def test_tie_break_lexicographic():
    # square 0-1-3 and 0-2-3 with equal fidelities
    t = Topology(4, {(0, 1): 0.9, (1, 3): 0.9, (0, 2): 0.9, (2, 3): 0.9})
    assert best_path(t, 0, 3) == [0, 1, 3]
    assert best_path(t, 3, 0) == [3, 1, 0]


def test_disconnected():
    t = Topology(4, {(0, 1): 1.0, (2, 3): 1.0})
    with pytest.raises(NoPath):
        best_path(t, 0, 3)


def test_json_roundtrip(schema):
    jsonschema = pytest.importorskip("jsonschema")
    t = bell_figure_topology()
    d = t.to_json()
    jsonschema.validate(d, schema("topology"))
    assert best_path(Topology.from_json(d), 0, 3) == [0, 1, 2, 3]


def brute_force(t, a, b):
    """Enumerate simple paths; keep the shortest, then highest fidelity, then lexicographic."""
    best = None
    nodes = [q for q in range(t.n_qubits) if q not in (a, b)]
    for k in range(0, len(nodes) + 1):
        for mid in itertools.permutations(nodes, k):
            path = [a, *mid, b]
            if all(v in t.neighbours(u) for u, v in zip(path, path[1:])):
                f = sum(t.fidelity(u, v) for u, v in zip(path, path[1:]))
                cand = (len(path), -round(f, 12), path)
                if best is None or cand < best:
                    best = cand
        if best is not None:
            return best[2]
    return None


@st.composite
def topologies(draw):
    n = draw(st.integers(2, 6))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    edges = {p: draw(st.sampled_from([0.8, 0.9, 0.95, 1.0])) for p in chosen}
    return Topology(n, edges)


@settings(max_examples=80, deadline=None)
@given(topologies(), st.data())
def test_path_is_shortest_and_optimal(t, data):
    a = data.draw(st.integers(0, t.n_qubits - 1))
    b = data.draw(st.integers(0, t.n_qubits - 1).filter(lambda x: x != a))
    adj = np.zeros((t.n_qubits, t.n_qubits))
    for (u, v) in t.edges:
        adj[u, v] = adj[v, u] = 1
    dist = shortest_path(adj, unweighted=True)[a, b]
    oracle = brute_force(t, a, b)
    if not np.isfinite(dist):
        with pytest.raises(NoPath):
            best_path(t, a, b)
        return
    path = best_path(t, a, b)
    assert len(path) - 1 == dist
    assert path == oracle
