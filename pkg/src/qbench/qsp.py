"""Phase factors for quantum signal processing in the W(x) convention.

    U(x) = e^{i psi_0 Z} prod_{j=1..d} [ W(x) e^{i psi_j Z} ],
    W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]].

Given a real odd polynomial f with |f| <= 1 on [-1, 1], we build a full
unitary completion U(x) with Re U_00 = f, then peel one W layer at a time
from its Laurent coefficients in w = e^{i theta}, x = cos(theta).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NoConvergence

_PLUS = np.array([[1, 1], [1, 1]], dtype=complex) / 2
_MINUS = np.array([[1, -1], [-1, 1]], dtype=complex) / 2


def exp_z(phi):
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def w_matrix(x: float) -> np.ndarray:
    s = np.sqrt(max(0.0, 1 - x * x))
    return np.array([[x, 1j * s], [1j * s, x]], dtype=complex)


def qsp_unitary(psis, x: float) -> np.ndarray:
    m = exp_z(psis[0])
    w = w_matrix(x)
    for p in psis[1:]:
        m = m @ w @ exp_z(p)
    return m


def chebyshev_nodes(k: int = 50) -> np.ndarray:
    return np.cos((2 * np.arange(k) + 1) * np.pi / (2 * k))


@dataclass
class PhaseSequence:
    degree: int
    wx_phases: np.ndarray   # psi_0 .. psi_d
    phases: np.ndarray      # circuit phases phi_1 .. phi_d
    coefficients: np.ndarray  # power-basis coefficients of the target polynomial

    def to_json(self) -> dict:
        return {"degree": self.degree, "wx_phases": [float(p) for p in self.wx_phases],
                "phases": [float(p) for p in self.phases],
                "coefficients": [float(c) for c in self.coefficients]}


def _select_roots(roots: np.ndarray, d: int) -> np.ndarray:
    """Pick d roots, one from each reciprocal pair (inside the unit circle)."""
    roots = np.asarray(roots, dtype=complex)
    inside = [r for r in roots if abs(r) < 1 - 1e-7]
    circle = sorted([r for r in roots if abs(abs(r) - 1) <= 1e-7], key=lambda r: np.angle(r))
    # roots on the circle come in (near) double pairs; keep one per pair
    kept = []
    used = [False] * len(circle)
    for i, r in enumerate(circle):
        if used[i]:
            continue
        used[i] = True
        j = min((k for k in range(len(circle)) if not used[k]),
                key=lambda k: abs(circle[k] - r), default=None)
        if j is not None:
            used[j] = True
            r = (r + circle[j]) / 2
        kept.append(r / abs(r))
    sel = np.array(inside + kept)
    if len(sel) != d:
        sel = roots[np.argsort(np.abs(roots))][:d]
    # restore exact conjugate symmetry
    return np.array(sorted(sel, key=lambda r: (round(r.real, 9), r.imag)))


def _complement(f_coeffs: np.ndarray, d: int):
    """Real coefficient vector of kappa(u) with K(w) = w^{-d} kappa(w^2)."""
    f2 = npoly.polymul(f_coeffs, f_coeffs)
    a_x = npoly.polysub([1.0], f2)  # 1 - f^2, even in x
    a_y = a_x[0::2]  # coefficients in y = x^2
    # u^d * A((u+1)^2 / (4u)) as a polynomial in u
    poly_u = np.zeros(2 * d + 1)
    for k, ak in enumerate(a_y):
        if ak == 0:
            continue
        term = npoly.polypow([1.0, 1.0], 2 * k) / 4**k  # (u+1)^{2k} / 4^k
        term = npoly.polymul(term, np.eye(1, d - k + 1, d - k)[0])  # * u^{d-k}
        poly_u[: len(term)] += ak * term
    trimmed = np.trim_zeros(poly_u, "b")
    roots = npoly.polyroots(trimmed) if len(trimmed) > 1 else np.array([])
    # zero roots come from degree deficits; they belong to the small-modulus half
    n_zero = 2 * d - (len(trimmed) - 1)
    roots = np.concatenate([roots, np.zeros(n_zero)])
    sel = _select_roots(roots, d)
    kappa = np.real(npoly.polyfromroots(sel))
    # kappa(-1)^2 = A(0) = 1 fixes the scale; the sign is free
    return kappa / npoly.polyval(-1.0, kappa)


def _laurent_unitary(f_coeffs: np.ndarray, kappa: np.ndarray, d: int, w: np.ndarray) -> np.ndarray:
    x = (w + 1 / w) / 2
    s = (w - 1 / w) / 2j
    f = npoly.polyval(x, f_coeffs)
    K = w ** (-d) * npoly.polyval(w * w, kappa)
    Kinv = w ** d * npoly.polyval(1 / (w * w), kappa)
    p_im = (K + Kinv) / 2
    q_s = (K - Kinv) / 2j
    out = np.empty((len(w), 2, 2), dtype=complex)
    out[:, 0, 0] = f + 1j * p_im
    out[:, 0, 1] = -q_s
    out[:, 1, 0] = q_s
    out[:, 1, 1] = f - 1j * p_im
    return out


def _strip(coeffs: dict, d: int) -> np.ndarray:
    """coeffs: power k in [-d, d] -> 2x2 matrix. Returns psi_0..psi_d."""
    psis = np.zeros(d + 1)
    for deg in range(d, 0, -1):
        top = coeffs[deg]
        row = 0 if np.linalg.norm(top[0]) >= np.linalg.norm(top[1]) else 1
        if np.linalg.norm(top[row]) < 1e-12:
            # leading term vanished: use the lowest coefficient instead
            low = coeffs[-deg]
            row = 0 if np.linalg.norm(low[0]) >= np.linalg.norm(low[1]) else 1
            psi = np.angle(-low[row, 0] / low[row, 1]) / 2
        else:
            psi = np.angle(top[row, 0] / top[row, 1]) / 2
        psis[deg] = psi
        e = exp_z(-psi)
        new = {}
        for k in range(-(deg - 1), deg):
            acc = np.zeros((2, 2), dtype=complex)
            if k + 1 in coeffs:
                acc += coeffs[k + 1] @ e @ _PLUS
            if k - 1 in coeffs:
                acc += coeffs[k - 1] @ e @ _MINUS
            new[k] = acc
        coeffs = new
    psis[0] = np.angle(coeffs[0][0, 0])
    return psis


def wx_to_circuit(psis: np.ndarray) -> np.ndarray:
    """Map W(x)-convention phases to the QSVT circuit phases phi_1..phi_d."""
    d = len(psis) - 1
    chi = np.zeros(d + 1)
    for j in range(1, d):
        chi[j] = psis[d - j] - np.pi / 2
    chi[d] = psis[0] + psis[d] - np.pi / 2 + d * np.pi / 2
    return -chi[1:]


def qsp_phases(coefficients, tol: float = 1e-9) -> PhaseSequence:
    """Phases whose QSP product has Re<0|U(x)|0> = P(x) for odd real P."""
    f = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
    d = len(f) - 1
    if d < 1 or d % 2 == 0 or np.any(np.abs(f[0::2]) > 1e-14):
        raise ValueError("polynomial must be odd with degree >= 1")
    grid = np.linspace(-1, 1, 2001)
    if np.max(np.abs(npoly.polyval(grid, f))) > 1 + 1e-12:
        raise ValueError("polynomial exceeds 1 in magnitude on [-1, 1]")
    kappa = _complement(f, d)
    M = 1
    while M < 4 * d + 4:
        M *= 2
    w = np.exp(2j * np.pi * np.arange(M) / M)
    samples = _laurent_unitary(f, kappa, d, w)
    fft = np.fft.fft(samples, axis=0) / M  # fft[k] = coefficient of w^k (mod M)
    coeffs = {k: fft[k % M] for k in range(-d, d + 1)}
    psis = _strip(coeffs, d)
    nodes = chebyshev_nodes(50)
    err = max(abs(qsp_unitary(psis, x)[0, 0].real - npoly.polyval(x, f)) for x in nodes)
    if not err <= tol:
        raise NoConvergence(f"phase reconstruction error {err:.3g} exceeds {tol:g}")
    return PhaseSequence(d, psis, wx_to_circuit(psis), f)
