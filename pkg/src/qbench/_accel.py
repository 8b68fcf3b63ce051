"""Backend selection for the hot statevector kernels.

Set ``QBENCH_KERNELS=numpy`` (or ``QBENCH_DISABLE_NUMBA=1``) to force the
pure-numpy implementation. Numba is used when importable otherwise.
"""
import os

_FORCE_NUMPY = (
    os.environ.get("QBENCH_KERNELS", "").strip().lower() == "numpy"
    or os.environ.get("QBENCH_DISABLE_NUMBA", "").strip() not in ("", "0")
)

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by environment")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
