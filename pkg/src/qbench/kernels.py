"""Statevector gate kernels.

Amplitudes are stored with qubit 0 as the most significant bit. Each kernel
updates ``state`` in place. Both a numba and a numpy flavour exist; the
exported ``apply_1q`` / ``apply_controlled`` pick one according to
``qbench._accel``.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit


@njit(cache=True, nogil=True)
def _apply_1q_numba(state, n, q, m):
    stride = 1 << (n - 1 - q)
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    size = state.shape[0]
    for base in range(0, size, 2 * stride):
        for off in range(stride):
            i0 = base + off
            i1 = i0 + stride
            a0 = state[i0]
            a1 = state[i1]
            state[i0] = m00 * a0 + m01 * a1
            state[i1] = m10 * a0 + m11 * a1


@njit(cache=True, nogil=True)
def _apply_controlled_numba(state, n, c, t, m):
    cmask = 1 << (n - 1 - c)
    stride = 1 << (n - 1 - t)
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    size = state.shape[0]
    for base in range(0, size, 2 * stride):
        for off in range(stride):
            i0 = base + off
            if (i0 & cmask) == 0:
                continue
            i1 = i0 + stride
            a0 = state[i0]
            a1 = state[i1]
            state[i0] = m00 * a0 + m01 * a1
            state[i1] = m10 * a0 + m11 * a1


def _apply_1q_numpy(state, n, q, m):
    view = state.reshape(1 << q, 2, 1 << (n - 1 - q))
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    view[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_controlled_numpy(state, n, c, t, m):
    view = state.reshape([2] * n)
    # index the control=1 slice, then act on the target axis
    idx = [slice(None)] * n
    idx[c] = 1
    sub = view[tuple(idx)]
    axis = t if t < c else t - 1
    sub = np.moveaxis(sub, axis, 0)
    a0 = sub[0].copy()
    a1 = sub[1].copy()
    sub[0] = m[0, 0] * a0 + m[0, 1] * a1
    sub[1] = m[1, 0] * a0 + m[1, 1] * a1


if HAVE_NUMBA:
    apply_1q = _apply_1q_numba
    apply_controlled = _apply_controlled_numba
else:
    apply_1q = _apply_1q_numpy
    apply_controlled = _apply_controlled_numpy

KERNELS = {
    "numpy": (_apply_1q_numpy, _apply_controlled_numpy),
    "numba": (_apply_1q_numba, _apply_controlled_numba),
}
