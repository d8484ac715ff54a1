"""Batched dense kernels for Liouvillian sweeps.

Each kernel has a pure-numpy implementation and a numba ``@njit`` twin.
The numba path is used when numba imports and ``WGQED_NUMBA`` is not ``0``.
Both paths take and return the same arrays, so callers never branch.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("WGQED_NUMBA", "1") != "0"

# chunk budget (bytes) for the numpy batched solves
_CHUNK_BYTES = 64 * 2**20


# ---------------------------------------------------------------- numpy path


def assemble_numpy(coeffs, basis):
    """``out[k] = sum_p coeffs[k, p] * basis[p]``."""
    return np.tensordot(coeffs, basis, axes=(1, 0))


def _bordered(L, trace_row):
    m = L.copy()
    m[..., 0, :] = trace_row
    return m


def steady_state_numpy(Ls, trace_row):
    m = _bordered(Ls, trace_row)
    rhs = np.zeros(Ls.shape[:-1], dtype=complex)
    rhs[..., 0] = 1.0
    return np.linalg.solve(m, rhs[..., None])[..., 0]


def resolvent_numpy(Lp, seed, weights, freqs):
    """``weights @ inv(1j f - Lp) @ seed`` for each ``f`` in ``freqs``."""
    dim = Lp.shape[0]
    eye = np.eye(dim)
    out = np.empty(len(freqs), dtype=complex)
    step = max(1, _CHUNK_BYTES // (16 * dim * dim))
    for s in range(0, len(freqs), step):
        f = freqs[s : s + step]
        m = 1j * f[:, None, None] * eye - Lp
        y = np.linalg.solve(m, np.broadcast_to(seed, (len(f), dim))[..., None])[..., 0]
        out[s : s + step] = y @ weights
    return out


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def assemble_numba(coeffs, basis):
        P, D = basis.shape[0], basis.shape[1]
        return np.dot(coeffs, basis.reshape(P, D * D)).reshape(coeffs.shape[0], D, D)

    @numba.njit(cache=True, nogil=True)
    def steady_state_numba(Ls, trace_row):
        K, D, _ = Ls.shape
        out = np.empty((K, D), dtype=np.complex128)
        rhs = np.zeros(D, dtype=np.complex128)
        rhs[0] = 1.0
        for k in range(K):
            m = Ls[k].copy()
            m[0, :] = trace_row
            out[k] = np.linalg.solve(m, rhs)
        return out

    @numba.njit(cache=True, nogil=True)
    def resolvent_numba(Lp, seed, weights, freqs):
        D = Lp.shape[0]
        out = np.empty(len(freqs), dtype=np.complex128)
        m = np.empty((D, D), dtype=np.complex128)
        for k in range(len(freqs)):
            for a in range(D):
                for b in range(D):
                    m[a, b] = -Lp[a, b]
                m[a, a] += 1j * freqs[k]
            y = np.linalg.solve(m, seed)
            acc = 0j
            for a in range(D):
                acc += weights[a] * y[a]
            out[k] = acc
        return out

else:  # pragma: no cover
    assemble_numba = steady_state_numba = resolvent_numba = None


def _pick(fast, slow):
    return fast if USE_NUMBA else slow


def assemble(coeffs, basis):
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    basis = np.ascontiguousarray(basis, dtype=complex)
    return _pick(assemble_numba, assemble_numpy)(coeffs, basis)


def steady_state_batch(Ls, trace_row):
    Ls = np.ascontiguousarray(Ls, dtype=complex)
    trace_row = np.ascontiguousarray(trace_row, dtype=complex)
    return _pick(steady_state_numba, steady_state_numpy)(Ls, trace_row)


def resolvent_sweep(Lp, seed, weights, freqs):
    args = (
        np.ascontiguousarray(Lp, dtype=complex),
        np.ascontiguousarray(seed, dtype=complex),
        np.ascontiguousarray(weights, dtype=complex),
        np.ascontiguousarray(freqs, dtype=float),
    )
    return _pick(resolvent_numba, resolvent_numpy)(*args)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
