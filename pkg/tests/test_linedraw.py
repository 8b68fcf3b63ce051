import itertools
import math
from functools import reduce

import numpy as np
import pytest

from qbench.backends import ExactBackend, SampleBackend
from qbench.bench import linedraw as L
from qbench.errors import IncompleteBatch
from qbench.sim import CountsHistogram, simulate

from conftest import dense_unitary


def dft_matrix(n):
    N = 1 << n
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(2j * np.pi * j * k / N) / math.sqrt(N)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_swap_free_qft(n):
    u = dense_unitary(L.qft_circuit(n))
    perm = L.bit_reverse_permutation(n)
    assert np.allclose(u[perm, :], dft_matrix(n), atol=1e-12)


@pytest.mark.parametrize("name", ["kite", "heart8", "heart16"])
def test_curve_circuit_encodes_points(name):
    z = L.reference_curves()[name]
    c = L.curve_circuit(z)
    n = c.n_qubits
    amps = simulate(c).amplitudes[L.bit_reverse_permutation(n)]
    assert abs(abs(np.vdot(z, amps)) - 1) < 1e-12


@pytest.mark.parametrize("name,gates,gates_tol,dep,dep_tol",
                         [("kite", 6, 1, 6, 1), ("heart8", 16, 2, 12, 1), ("heart16", 35, 3, 26, 1)])
def test_gate_counts_match_settings_table(name, gates, gates_tol, dep, dep_tol):
    from qbench.circuit import depth, gate_count
    c = L.curve_circuit(L.reference_curves()[name])
    assert abs(gate_count(c) - gates) <= gates_tol
    assert abs(depth(c) - dep) <= dep_tol


@pytest.mark.parametrize("pauli", ["X", "Y", "Z"])
def test_basis_suffix_maps_eigenstates(pauli):
    suffix = L.pauli_measure_circuit(pauli)
    m = reduce(lambda acc, g: g.matrix @ acc, suffix, np.eye(2))
    for bit in (0, 1):
        v = L._EIGEN[(pauli, bit)]
        out = m @ v
        assert abs(abs(out[bit]) - 1) < 1e-12


def exact_batch(rho, n, shots=1.0):
    """Histograms from Born probabilities computed directly from rho."""
    hists = {}
    for pauli in L.pauli_strings(n):
        counts = {}
        for bits in itertools.product((0, 1), repeat=n):
            ket = reduce(np.kron, [L._EIGEN[(p, b)] for p, b in zip(pauli, bits)])
            counts["".join(map(str, bits))] = shots * float(np.real(ket.conj() @ rho @ ket))
        hists[pauli] = CountsHistogram(shots, counts)
    return L.TomographyBatch(n, hists)


@pytest.mark.parametrize("n", [1, 2])
def test_estimator_is_unbiased(n):
    """Averaging over every basis and outcome weighted by its probability returns rho."""
    rng = np.random.default_rng(n)
    for _ in range(5):
        g = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        est = L.estimate_state(exact_batch(rho, n))
        assert np.allclose(est.L, rho, atol=1e-12)


def test_pure_state_recovered_with_zero_score():
    z = L.reference_curves()["kite"]
    rho = np.outer(z, z.conj())
    est = L.estimate_state(exact_batch(rho, 2))
    assert est.eigenvalue == pytest.approx(1)
    score, rotated = L.align_and_score(z, est.vector, est.eigenvalue)
    assert score < 1e-7
    assert np.allclose(rotated, z, atol=1e-7)


def test_score_formula():
    psi = np.array([1, 0], complex)
    est = np.array([np.cos(0.2), np.sin(0.2)], complex) * np.exp(0.7j)
    p = 0.81
    score, _ = L.align_and_score(psi, est, p)
    d = math.sqrt(2 - 2 * math.cos(0.2))
    assert score == pytest.approx((1 - 0.9) + 0.9 * d)


@pytest.mark.parametrize("name", ["kite", "heart8"])
def test_exact_backend_scores_zero(name):
    res = L.run_linedraw(name, L.reference_curves()[name], ExactBackend(), batches=2, shots=4096)
    assert res.score.value < 1e-7


def test_incomplete_batch():
    with pytest.raises(IncompleteBatch):
        L.estimate_state(L.TomographyBatch(1, {"X": CountsHistogram(1, {"0": 1})}))


def test_bad_curve_size():
    with pytest.raises(ValueError):
        L.fourier_coefficients(np.ones(6))


def test_sampled_batches_deterministic_and_stderr():
    z = L.reference_curves()["kite"]
    a = L.run_linedraw("kite", z, SampleBackend(2), batches=5, shots=256)
    b = L.run_linedraw("kite", z, SampleBackend(2), batches=5, shots=256)
    assert a.batch_scores == b.batch_scores
    assert len(set(a.batch_scores)) == 5
    assert a.score.stderr == pytest.approx(np.std(a.batch_scores, ddof=1) / math.sqrt(5))
