import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbench.analysis import (BENCHMARKS, ScoreWithError, bin_sizes, binned_points,
                             binomial_stderr, correlate, fit_noise, mean_score, mean_with_error,
                             normalized_error)
from qbench.errors import InsufficientPoints, MissingBenchmark


def test_binomial_stderr():
    assert binomial_stderr(0, 10) == 0 and binomial_stderr(1, 10) == 0
    assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
    assert binomial_stderr(0.25, 8192) == pytest.approx(math.sqrt(0.25 * 0.75 / 8192))
    assert binomial_stderr(0.25, 8192) == pytest.approx(0.00478, abs=1e-5)


def test_mean_with_error_quadrature():
    s = mean_with_error([ScoreWithError(1, 0.3), ScoreWithError(2, 0.4)])
    assert s.value == 1.5 and s.stderr == pytest.approx(0.25)


def test_fit_exact_synthetic():
    N = np.array([4, 16, 64, 256, 1024, 4096])
    fit = fit_noise(list(zip(N, 2 / np.sqrt(N) + 0.03)))
    assert fit.n_s == pytest.approx(2, abs=1e-9)
    assert fit.n_d == pytest.approx(0.03, abs=1e-9)
    assert fit.residual < 1e-9


def test_fit_constant():
    fit = fit_noise([(4, 0.2), (64, 0.2), (1024, 0.2)])
    assert fit.n_s == pytest.approx(0, abs=1e-12) and fit.n_d == pytest.approx(0.2)


def test_fit_needs_three_shot_counts():
    with pytest.raises(InsufficientPoints):
        fit_noise([(4, 0.1), (4, 0.2), (16, 0.1)])


def synthetic_binomial(n_s, n_d, rng, sizes):
    """Mean |p_hat - p| over many pixels, plus a planted offset, behaves as n_s / sqrt(N) + n_d."""
    pts, errs = [], []
    for N in sizes:
        reps = []
        for _ in range(40):
            p = 0.5
            phat = rng.binomial(N, p, size=200) / N
            reps.append(n_s * np.sqrt(np.mean((phat - p) ** 2)) / 0.5 + n_d)
        pts.append((N, float(np.mean(reps))))
        errs.append(float(np.std(reps, ddof=1) / np.sqrt(len(reps))))
    return pts, errs


@pytest.mark.parametrize("n_s,n_d", [(0.5, 0.02), (2.0, 0.1), (1.0, 0.0)])
def test_fit_recovers_planted_within_3_sigma(n_s, n_d):
    rng = np.random.default_rng(int(1000 * n_s + 100 * n_d))
    pts, errs = synthetic_binomial(n_s, n_d, rng, [4, 8, 16, 32, 64, 128, 256, 512, 1024, 4096])
    fit = fit_noise(pts, errs)
    assert abs(fit.n_s - n_s) <= 3 * fit.n_s_err + 1e-12
    assert abs(fit.n_d - n_d) <= 3 * fit.n_d_err + 1e-12


def test_bin_sizes():
    assert bin_sizes(4096) == [2048, 1024, 512, 256, 128, 64, 32, 16, 8, 4]
    assert bin_sizes(100) == [32, 16, 8, 4]


def test_binned_points_uses_disjoint_bins():
    rng = np.random.default_rng(0)
    table = [np.arange(64)]
    seen = []

    def score(bins, B):
        seen.append((B, tuple(bins[0])))
        return float(B)

    pts, errs = binned_points(table, score, [16, 4], rng)
    assert pts == [(16, 16.0), (4, 4.0)]
    b16 = [s for B, s in seen if B == 16]
    assert len(b16) == 4 and sorted(sum(b16, ())) == list(range(64))


def test_mean_score_examples():
    all_tenth = {b: 0.1 for b in BENCHMARKS}
    all_tenth["bell"] = 1.5 / 1.1  # normalizes to 0.1
    all_tenth["platonic"] = 0.2
    all_tenth["line"] = 0.1 * math.sqrt(2)
    assert mean_score(all_tenth) == pytest.approx(10)
    half = {b: (v if b != "bell" else v) for b, v in all_tenth.items()}
    for b in ("sm", "mandelbrot", "matinv", "platonic", "line"):
        half[b] = all_tenth[b] / 2
    half["bell"] = 1.5 / 1.05
    assert mean_score(half) == pytest.approx(20)
    assert normalized_error("bell", 1.5) == 0
    assert normalized_error("bell", 0.5) == 1.0  # clamped


def test_mean_score_missing():
    with pytest.raises(MissingBenchmark):
        mean_score({"bell": 1.4})


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.001, 1), min_size=6, max_size=6), st.integers(0, 5), st.floats(0.1, 0.99))
def test_mean_score_monotone(vals, idx, factor):
    rep = dict(zip(BENCHMARKS, vals))
    rep["bell"] = 1.5 - vals[0] / 2
    better = dict(rep)
    b = BENCHMARKS[idx]
    if b == "bell":
        better[b] = min(1.5, rep[b] + (1.5 - rep[b]) * (1 - factor))
    else:
        better[b] = rep[b] * factor
    assert mean_score(better) >= mean_score(rep) - 1e-12


def brute_pearson(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    dx, dy = x - x.mean(), y - y.mean()
    return float((dx @ dy) / math.sqrt((dx @ dx) * (dy @ dy)))


def test_correlate():
    x = [1, 2, 3, 4, 5]
    assert correlate(x, [2, 4, 6, 8, 10])[0] == pytest.approx(1)
    assert correlate(x, [5, 4, 3, 2, 1])[0] == pytest.approx(-1)
    rng = np.random.default_rng(2)
    xs = rng.uniform(0, 1, 40)
    ys = 3 * xs + rng.normal(0, 0.5, 40)
    r, conf = correlate(xs, ys)
    assert abs(r - brute_pearson(xs, ys)) < 0.05
    assert 0 <= conf <= 1
    # confidence from the t statistic with n - 2 degrees of freedom
    from scipy import stats
    t = r * math.sqrt(38 / (1 - r * r))
    assert conf == pytest.approx(1 - 2 * stats.t.sf(abs(t), 38))
    r2, _ = correlate(xs, 2 ** (ys - ys.min() + 1), log2_qv=True)
    assert r2 == pytest.approx(brute_pearson(xs, ys))
    with pytest.raises(InsufficientPoints):
        correlate([1, 2], [1, 2])
