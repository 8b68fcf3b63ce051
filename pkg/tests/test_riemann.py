import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbench.bench import riemann as R
from qbench.circuit import depth, gate_count
from qbench.sim import marginal, postselect_state, simulate

points = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False).filter(
    lambda z: abs(z) > 1e-3)


@pytest.mark.parametrize("n,gates,dep", [(1, 8, 6), (2, 20, 10), (3, 44, 14)])
def test_microscope_table_row(n, gates, dep):
    c = R.microscope_circuit(n, 0.3 + 0.2j)
    assert gate_count(c) == gates == 2 * 2**n + 4 * (2**n - 1)
    assert depth(c) == dep == 2 + 4 * n


@pytest.mark.parametrize("n,gates,dep", [(1, 13, 11), (2, 37, 21), (3, 85, 31)])
def test_mandelbrot_table_row(n, gates, dep):
    c = R.mandelbrot_circuit(n, -0.4 + 0.3j)
    assert gate_count(c) == gates == 2**n + 11 * (2**n - 1)
    assert depth(c) == dep == 1 + 10 * n


@settings(max_examples=40, deadline=None)
@given(points)
def test_state_preparation(z):
    c = R.Circuit(1)
    R._add_prep(c, 0, z)
    v = simulate(c).amplitudes
    assert abs(abs(np.vdot(R.psi(z), v)) - 1) < 1e-12
    assert cmath.isclose(R.point_of_state(R.psi(z)), z, rel_tol=1e-9)


def squaring_circuit(z):
    c = R.Circuit(2)
    R._add_prep(c, 0, z)
    R._add_prep(c, 1, z)
    R.f_block(c, 0, 1)
    return c


def expected_F(z):
    w = z * z
    return (w + 1j) / (1j * w + 1)


@settings(max_examples=40, deadline=None)
@given(points)
def test_f_block_maps_to_moebius_of_square(z):
    if abs(1j * z * z + 1) < 1e-3:
        return
    state = simulate(squaring_circuit(z))
    kept, prob = postselect_state(state, 1, 0)
    out = kept.amplitudes.reshape(2, 2)[:, 0]
    assert abs(abs(np.vdot(R.psi(expected_F(z)), out)) - 1) < 1e-9
    # branch probability: |z^2|^2 + 1 over (|z|^2 + 1)^2
    assert prob == pytest.approx((abs(z) ** 4 + 1) / (abs(z) ** 2 + 1) ** 2, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(points, points)
def test_gc_block_squares_and_shifts(w, c):
    circ = R.Circuit(2)
    R._add_prep(circ, 0, w)
    R._add_prep(circ, 1, w)
    R.gc_block(circ, 0, 1, c)
    kept, prob = postselect_state(simulate(circ), 1, 0)
    out = kept.amplitudes.reshape(2, 2)[:, 0]
    target = w * w + c
    assert abs(abs(np.vdot(R.psi(target), out)) - 1) < 1e-9
    assert prob > 0


@pytest.mark.parametrize("kind", R.KINDS)
@pytest.mark.parametrize("n", [1, 2])
def test_analytic_matches_simulation(kind, n):
    rng = np.random.default_rng(n)
    fn = R.analytic_microscope if kind == "microscope" else R.analytic_mandelbrot
    for _ in range(12):
        z = complex(*rng.uniform(-2, 2, 2))
        c = R.build_circuit(kind, n, z)
        state = simulate(c)
        width = c.n_qubits
        p = marginal(state.amplitudes, width, list(range(width)))
        valid = p.reshape(2, -1)[:, 0]
        p_ps, p_1 = fn(n, z)
        assert valid.sum() == pytest.approx(p_ps, abs=1e-12)
        assert valid[1] / valid.sum() == pytest.approx(p_1, abs=1e-10)


def test_analytic_level_one_closed_form():
    z = 0.7 - 0.2j
    p_ps, p_1 = R.analytic_microscope(1, z)
    w = expected_F(z)
    assert p_ps == pytest.approx((abs(z) ** 4 + 1) / (abs(z) ** 2 + 1) ** 2)
    assert p_1 == pytest.approx(1 / (abs(w) ** 2 + 1))


def test_pixel_orientation():
    pts = R.pixel_points(4)
    assert pts[0, 0] == complex(-1.5, 1.5)
    assert pts[3, 3] == complex(1.5, -1.5)


def test_exact_grid_reproduces_oracle():
    from qbench.backends import ExactBackend
    run = R.run_grid("microscope", 1, 8, 4096, ExactBackend())
    ps, p1 = R.oracle_grids("microscope", 1, 8)
    s_ps, s_1 = R.score_grids(run, ps, p1)
    assert s_ps.value < 1e-12 and s_1.value < 1e-12


def test_resolution_mismatch():
    from qbench.backends import ExactBackend
    from qbench.errors import ResolutionMismatch
    run = R.run_grid("microscope", 1, 4, 16, ExactBackend())
    with pytest.raises(ResolutionMismatch):
        R.score_grids(run, *R.oracle_grids("microscope", 1, 8))
