"""Cross-benchmark statistics: standard errors, noise fits, aggregation, correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .errors import InsufficientPoints, MissingBenchmark


@dataclass(frozen=True)
class ScoreWithError:
    value: float
    stderr: float

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be non-negative")

    def to_json(self) -> dict:
        return {"value": float(self.value), "stderr": float(self.stderr)}

    def __str__(self):
        return f"{self.value:.4f} ± {self.stderr:.4f}"


def binomial_stderr(p: float, n: float) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    p = min(max(float(p), 0.0), 1.0)
    return math.sqrt(p * (1 - p) / n)


def mean_with_error(scores) -> ScoreWithError:
    """Arithmetic mean; errors of independent terms added in quadrature."""
    scores = list(scores)
    k = len(scores)
    value = sum(s.value for s in scores) / k
    err = math.sqrt(sum(s.stderr ** 2 for s in scores)) / k
    return ScoreWithError(value, err)


@dataclass(frozen=True)
class NoiseFit:
    n_s: float
    n_d: float
    residual: float
    n_s_err: float = 0.0
    n_d_err: float = 0.0

    def to_json(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("n_s", "n_d", "residual", "n_s_err", "n_d_err")}


def fit_noise(points, errors=None) -> NoiseFit:
    """Non-negative least squares of score = n_s / sqrt(N) + n_d.

    ``points`` is a sequence of (N, score). Optional per-point ``errors``
    weight the rows and yield parameter uncertainties from the
    linearized covariance.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(np.unique(pts[:, 0])) < 3:
        raise InsufficientPoints("need at least three distinct shot counts")
    N, y = pts[:, 0], pts[:, 1]
    w = np.ones_like(y) if errors is None else 1.0 / np.asarray(errors, dtype=float)
    design = np.column_stack([1 / np.sqrt(N), np.ones_like(N)])
    coef, rnorm = optimize.nnls(design * w[:, None], y * w)
    resid = y - design @ coef
    dof = max(len(y) - 2, 1)
    if errors is None:
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.pinv(design.T @ design)
    else:
        cov = np.linalg.pinv((design * w[:, None]).T @ (design * w[:, None]))
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    return NoiseFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2))),
                    float(errs[0]), float(errs[1]))


def bin_sizes(total: int, smallest: int = 4, largest: int = 2048) -> list:
    """Powers of two from ``largest`` down to ``smallest``, keeping at least two bins each."""
    sizes = []
    b = largest
    while b >= smallest:
        if b <= total // 2:
            sizes.append(b)
        b //= 2
    return sizes


def binned_points(shot_table, score_fn, sizes, rng) -> tuple:
    """Bin-resampling driver.

    ``shot_table`` is a list (one entry per circuit) of per-shot outcome
    arrays. For each bin size B the shots of every circuit are shuffled and
    cut into bins of B; ``score_fn(bins)`` scores one bin across all
    circuits. Returns (points, errors) with the mean and standard error of
    the bin scores for each B.
    """
    shuffled = [rng.permutation(np.asarray(s)) for s in shot_table]
    points, errors = [], []
    for B in sizes:
        n_bins = min(len(s) for s in shuffled) // B
        vals = [score_fn([s[k * B:(k + 1) * B] for s in shuffled], B) for k in range(n_bins)]
        vals = np.asarray(vals, dtype=float)
        points.append((B, float(vals.mean())))
        errors.append(float(vals.std(ddof=1) / np.sqrt(len(vals))))
    return points, errors


BENCHMARKS = ("bell", "sm", "mandelbrot", "line", "matinv", "platonic")


def normalized_error(name: str, value: float) -> float:
    if name == "platonic":
        return value / 2
    if name == "line":
        return value / math.sqrt(2)
    if name == "bell":
        if value <= 0:
            return 1.0
        return min(max((1.5 - value) / value, 0.0), 1.0)
    return value


def mean_score(report: dict) -> float:
    """Reciprocal of the mean normalized error score over all six benchmarks."""
    missing = [b for b in BENCHMARKS if b not in report]
    if missing:
        raise MissingBenchmark(f"missing overall scores for: {', '.join(missing)}")
    vals = []
    for b in BENCHMARKS:
        s = report[b]
        vals.append(normalized_error(b, s.value if isinstance(s, ScoreWithError) else float(s)))
    m = float(np.mean(vals))
    return math.inf if m == 0 else 1.0 / m


def correlate(scores, qv, log2_qv: bool = False) -> tuple:
    """Pearson r and confidence 1 - p of the two-sided t-test (n - 2 dof)."""
    x = np.asarray(scores, dtype=float)
    y = np.asarray(qv, dtype=float)
    if log2_qv:
        y = np.log2(y)
    if len(x) != len(y) or len(x) < 3:
        raise InsufficientPoints("need at least three paired points")
    r, p = stats.pearsonr(x, y)
    return float(r), float(1 - p)
