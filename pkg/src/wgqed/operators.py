"""Qubit operators and column-stacking vectorization helpers.

Basis ordering: qubit 0 is the most significant tensor factor, and each
qubit has ``|g> = 0``, ``|e> = 1``. So for two qubits ``|ge>`` is index 1.
"""

from functools import lru_cache

import numpy as np

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


@lru_cache(maxsize=None)
def _lowering_cached(j: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, SIGMA_MINUS if k == j else np.eye(2))
    out.setflags(write=False)
    return out


def lowering(j: int, n: int) -> np.ndarray:
    """sigma^- acting on qubit ``j`` of ``n``."""
    if not 0 <= j < n:
        raise IndexError(f"qubit index {j} out of range for {n} qubits")
    return _lowering_cached(j, n)


def raising(j: int, n: int) -> np.ndarray:
    return lowering(j, n).conj().T


def number(j: int, n: int) -> np.ndarray:
    sm = lowering(j, n)
    return sm.conj().T @ sm


def sigma_z(j: int, n: int) -> np.ndarray:
    return 2 * number(j, n) - np.eye(2**n)


def basis_state(label: str) -> np.ndarray:
    """Ket for a label such as ``"ge"``."""
    idx = int(label.translate(str.maketrans("ge", "01")), 2)
    psi = np.zeros(2 ** len(label), dtype=complex)
    psi[idx] = 1.0
    return psi


def bright_state() -> np.ndarray:
    return (basis_state("ge") + basis_state("eg")) / np.sqrt(2)


def dark_state() -> np.ndarray:
    return (basis_state("ge") - basis_state("eg")) / np.sqrt(2)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[-1])))
    return np.asarray(v).reshape(d, d, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho``."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> rho @ a``."""
    return np.kron(a.T, np.eye(a.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho @ b``."""
    return np.kron(b.T, a)
