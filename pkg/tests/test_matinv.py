import math

import numpy as np
import pytest

from qbench.backends import ExactBackend, SampleBackend
from qbench.bench import matinv as M
from qbench.circuit import depth, gate_count
from qbench.errors import DegenerateSigmas
from qbench.render import matinv_image


@pytest.mark.parametrize("s1,s2", [(1.0, 0.3), (0.9, 0.5), (1.0, 0.05)])
def test_inversion_polynomial(s1, s2):
    a, b, c = M.inversion_polynomial(s1, s2)
    p = lambda x: a * x + b * x**3
    assert p(s1) == pytest.approx(c / s1, rel=1e-12)
    assert p(s2) == pytest.approx(c / s2, rel=1e-12)
    grid = np.linspace(-1, 1, 20001)
    assert np.max(np.abs(p(grid))) <= 1


def test_degenerate_sigmas():
    with pytest.raises(DegenerateSigmas):
        M.inversion_polynomial(0.5, 0.5)


@pytest.mark.parametrize("size", [2, 4, 8])
def test_block_encoding_and_inverse(size):
    inst = M.default_instance(size)
    be = inst.be
    # A is Hermitian with the prescribed spectrum
    assert np.allclose(be.A, be.A.conj().T, atol=1e-12)
    ev = np.sort(np.linalg.eigvalsh(be.A))
    assert np.allclose(ev, np.sort([be.sigma1] * (size // 2) + [be.sigma2] * (size // 2)))
    assert np.allclose(be.U.conj().T @ be.U, np.eye(2 * size), atol=1e-12)
    block = M.block_of_circuit(be, inst.phases)
    assert np.abs(block - inst.target).max() < 1e-8


@pytest.mark.parametrize("size", sorted(M.INSTANCES))
def test_calibrated_ideal_maximum(size):
    s1, s2, seed = M.INSTANCES[size]
    assert M.ideal_max_for(size, s1, s2, seed) == pytest.approx(M.COLOR_SCALE[size], abs=1e-3)


@pytest.mark.parametrize("size,gates,dep", [(2, 26, 20), (4, 57, 32), (8, 90, 38), (16, 118, 44)])
def test_circuit_size_near_settings_table(size, gates, dep):
    c = M.qsvt_circuit(M.default_instance(size).be, M.default_instance(size).phases, 0)
    assert abs(gate_count(c) - gates) <= 0.3 * gates
    assert abs(depth(c) - dep) <= 0.3 * dep


def test_exact_columns_score_zero():
    inst = M.default_instance(4)
    cols = M.run_columns(inst, ExactBackend(), 8192)
    assert np.allclose(cols.probs, inst.ideal, atol=1e-12)
    assert M.matinv_score(cols, inst.ideal).value < 1e-12


def test_score_formula_extremes():
    ideal = np.array([[0.5, 0.0], [0.0, 0.5]])
    same = M.ColumnHistograms(2, 1000, ideal.copy())
    assert M.matinv_score(same, ideal).value == 0
    disjoint = M.ColumnHistograms(2, 1000, np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert M.matinv_score(disjoint, ideal).value == pytest.approx(1.0)


def test_score_stderr_matches_monte_carlo():
    inst = M.default_instance(2)
    shots = 2000
    scores, errs = [], []
    for seed in range(60):
        cols = M.run_columns(inst, SampleBackend(seed), shots)
        s = M.matinv_score(cols, inst.ideal)
        scores.append(s.value)
        errs.append(s.stderr)
    # the propagated error tracks the seed-to-seed spread within a factor 2
    ratio = np.mean(errs) / np.std(scores, ddof=1)
    assert 0.5 < ratio < 2


def test_ninety_percent_rule():
    inst = M.default_instance(2)
    dark = M.histogram_darkness(inst.ideal, inst.ideal_max_prob)
    assert dark.max() == pytest.approx(0.9)
    img = matinv_image(dark, scale=1)
    assert abs(int(img.min()) - 255 * 0.1) <= 0.5
    over = M.histogram_darkness(np.array([[1.0]]), 0.5)
    assert over.max() == 1.0
