import math

import numpy as np
import pytest

from qbench.backends import ExactBackend
from qbench.bench import platonic as PF
from qbench.circuit import depth, gate_count
from qbench.sim import simulate

from conftest import dense_unitary


def reference_weak_matrix(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, 0, 1j * s, 0],
                     [0, s, 0, 1j * c],
                     [1j * s, 0, c, 0],
                     [0, 1j * c, 0, s]])


@pytest.mark.parametrize("strength", [0.2, 0.75, 1.0])
def test_weak_block_unitary(strength):
    spec = PF.WeakMeasSpec(strength)
    assert math.cos(spec.theta) ** 2 == pytest.approx((1 + strength) / 2)
    u = dense_unitary(PF.weak_circuit(spec))
    assert np.abs(u - reference_weak_matrix(spec.theta)).max() < 1e-12


def test_strength_limits():
    # s = 1 is projective: outcome 0 only for system |0>
    u = reference_weak_matrix(PF.WeakMeasSpec(1.0).theta)
    assert abs(u[2, 0]) < 1e-12 and abs(u[1, 1]) < 1e-12
    with pytest.raises(ValueError):
        PF.WeakMeasSpec(0.0)


def system_bloch_after(bases, outcomes, s):
    """Simulate with final Z readout frame; project ancillas; return system Bloch vector."""
    c = PF.platonic_circuit(bases, "Z", s)
    d = len(bases)
    amps = simulate(c).amplitudes.reshape([2] * (d + 1))
    sys_amps = amps[(slice(None),) + tuple(int(o) for o in outcomes)]
    return PF.bloch_vector(sys_amps)


def test_oracle_equivalence_random_cases():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 5))
        bases = "".join(rng.choice(list("XYZ"), d))
        outs = "".join(rng.choice(list("01"), d))
        s = float(rng.uniform(0.05, 0.95))
        got = system_bloch_after(bases, outs, s)
        want = PF.expected_trajectory(bases, outs, s)[-1]
        worst = max(worst, np.abs(got - want).max())
    assert worst < 1e-10


def test_bloch_update_stays_on_sphere():
    rng = np.random.default_rng(1)
    for _ in range(100):
        r = rng.normal(size=3)
        r /= np.linalg.norm(r)
        out = PF.bloch_update(r, rng.choice(list("XYZ")), int(rng.integers(2)), rng.uniform(0.01, 0.99))
        assert np.linalg.norm(out) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_circuit_size_within_stated_bounds(d):
    for bases in PF.basis_sequences(d):
        for f in PF.FINAL_BASES:
            c = PF.platonic_circuit(bases, f, 0.75)
            assert gate_count(c) <= 1 + 8 * d
            assert depth(c) <= 2 + 5 * d


@pytest.mark.parametrize("d", [1, 2])
def test_exact_backend_scores_zero(d):
    res = PF.run_platonic(d, ExactBackend(), shots=4096)
    assert len(res.labels) == 6**d
    assert res.score.value < 1e-10


def test_score_definition():
    meas = np.array([[0.0, 0.0], [1.0, 0.0]])
    exp = np.array([[0.0, 1.0], [0.0, 0.0]])
    sc = PF.platonic_score(meas, exp)
    assert sc.value == pytest.approx(1.0)
    assert sc.stderr == pytest.approx(0.0)
