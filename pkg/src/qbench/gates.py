"""Named single-qubit matrices used by the benchmark circuits."""
import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG = S.conj().T
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def zpow(phi: float) -> np.ndarray:
    """Z raised to ``phi``: diag(1, e^{i pi phi})."""
    return np.array([[1, 0], [0, np.exp(1j * np.pi * phi)]], dtype=complex)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def ypow(t: float) -> np.ndarray:
    """Y raised to ``t``, i.e. e^{i pi t/2} R_y(pi t)."""
    return np.exp(0.5j * np.pi * t) * ry(np.pi * t)


def exp_x(theta: float) -> np.ndarray:
    """e^{i theta X}."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def exp_z(phi: float) -> np.ndarray:
    """e^{i phi Z}."""
    return np.array([[np.exp(1j * phi), 0], [0, np.exp(-1j * phi)]], dtype=complex)


def qft_r(k: int) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(2j * np.pi / 2**k)]], dtype=complex)


def reflection(r: float) -> np.ndarray:
    """[[1, r], [r, -1]] / sqrt(1 + r^2)."""
    return np.array([[1, r], [r, -1]], dtype=complex) / np.sqrt(1 + r * r)


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return m.shape == (2, 2) and np.max(np.abs(m.conj().T @ m - I2)) <= tol
