"""Dense Lindblad engine: Liouvillians, time evolution and steady states.

Density operators are plain ``(2**N, 2**N)`` complex arrays, Liouvillians
``(4**N, 4**N)`` arrays acting on column-stacked ``vec(rho)``. Generators are
in MHz with the gamma/2pi convention, so ``exp(2 pi L t)`` propagates over
``t`` microseconds.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg

from . import _kernels
from .geometry import EffectiveModel
from .operators import lowering, number, raising, sigma_z, spost, spre, sprepost, vec, unvec

TWO_PI = 2 * np.pi
NULL_RTOL = 1e-10


class NumericalError(RuntimeError):
    """A computation produced an invalid numerical result."""


class DegenerateSteadyState(NumericalError):
    """The Liouvillian has more than one stationary state.

    ``basis`` holds density-matrix-shaped null vectors spanning the
    stationary subspace.
    """

    def __init__(self, nullity: int, basis: list[np.ndarray]):
        super().__init__(
            f"steady state is not unique (null space dimension {nullity}); "
            "add residual dephasing or use the reported basis"
        )
        self.nullity = nullity
        self.basis = basis


class PositivityError(NumericalError):
    pass


def _hamiltonian_super(h: np.ndarray) -> np.ndarray:
    return -1j * (spre(h) - spost(h))


def _dissipator_super(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``rho -> a rho b^+ - {b^+ a, rho}/2``."""
    bd = b.conj().T
    return sprepost(a, bd) - 0.5 * spre(bd @ a) - 0.5 * spost(bd @ a)


@lru_cache(maxsize=None)
def superoperator_basis(n: int) -> np.ndarray:
    """Stack of superoperators whose linear combination gives the Liouvillian.

    Ordering matches :func:`model_coefficients`: detunings, drive (real and
    imaginary parts), exchange pairs ``i<j``, dissipator entries ``(i, j)``
    row-major, dephasing.
    """
    terms = []
    for j in range(n):
        terms.append(_hamiltonian_super(-number(j, n)))
    for j in range(n):
        sp, sm = raising(j, n), lowering(j, n)
        terms.append(_hamiltonian_super(0.5 * (sp + sm)))
        terms.append(_hamiltonian_super(0.5j * (sp - sm)))
    for i in range(n):
        for j in range(i + 1, n):
            hop = raising(i, n) @ lowering(j, n)
            terms.append(_hamiltonian_super(hop + hop.conj().T))
    for i in range(n):
        for j in range(n):
            terms.append(_dissipator_super(lowering(i, n), lowering(j, n)))
    for j in range(n):
        sz = sigma_z(j, n)
        terms.append(0.5 * (sprepost(sz, sz) - np.eye(4**n)))
    basis = np.ascontiguousarray(np.array(terms, dtype=complex))
    basis.setflags(write=False)
    return basis


def model_coefficients(model: EffectiveModel) -> np.ndarray:
    n = model.n_qubits
    drive = np.column_stack([model.drive.real, model.drive.imag]).ravel()
    iu = np.triu_indices(n, k=1)
    return np.concatenate(
        [
            model.detunings,
            drive,
            model.exchange[iu],
            model.dissipator.ravel(),
            model.dephasing,
        ]
    ).astype(complex)


def liouvillian(model: EffectiveModel) -> np.ndarray:
    """Generator ``L`` with ``vec(drho/dt) = 2 pi L vec(rho)``."""
    return liouvillian_batch([model])[0]


def liouvillian_batch(models) -> np.ndarray:
    models = list(models)
    n = models[0].n_qubits
    if any(m.n_qubits != n for m in models):
        raise ValueError("all models in a batch must have the same size")
    coeffs = np.array([model_coefficients(m) for m in models])
    return _kernels.assemble(coeffs, superoperator_basis(n))


def trace_row(dim: int) -> np.ndarray:
    """Row functional with ``trace_row @ vec(rho) == Tr rho``."""
    return vec(np.eye(dim)).astype(complex)


def check_density(rho: np.ndarray, atol: float = 1e-10, pos_tol: float = 1e-9) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError(f"density operator has trace {np.trace(rho):.12g}")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lowest < -pos_tol:
        raise PositivityError(f"density operator has eigenvalue {lowest:.3g}")


def evolve(rho0: np.ndarray, L: np.ndarray, t: float) -> np.ndarray:
    """``rho(t)`` for ``t`` in microseconds."""
    if t < 0:
        raise ValueError("t must be non-negative")
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    rho = unvec(scipy.linalg.expm(TWO_PI * t * L) @ vec(rho0))
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lowest < -1e-9:
        raise PositivityError(f"evolved state lost positivity (eigenvalue {lowest:.3g})")
    return rho


def _null_space(L: np.ndarray, rtol: float = NULL_RTOL):
    _, s, vh = np.linalg.svd(L)
    null = s < rtol * s[0]
    return vh[null].conj(), s


def _normalize(v: np.ndarray) -> np.ndarray:
    rho = unvec(v)
    tr = np.trace(rho)
    if abs(tr) > 1e-12:
        rho = rho / tr
    return 0.5 * (rho + rho.conj().T)


def steady_state(L: np.ndarray, rtol: float = NULL_RTOL) -> np.ndarray:
    """Unique stationary density operator of ``L``.

    Raises :class:`DegenerateSteadyState` when the null space of ``L`` has
    dimension above one.
    """
    dim = int(round(np.sqrt(L.shape[0])))
    null, s = _null_space(L, rtol)
    if len(null) > 1:
        raise DegenerateSteadyState(len(null), [_normalize(v) for v in null])

    rho = None
    try:
        v = _kernels.steady_state_batch(L[None], trace_row(dim))[0]
        if np.all(np.isfinite(v)):
            rho = _normalize(v)
    except np.linalg.LinAlgError:
        pass
    if rho is None or np.linalg.norm(L @ vec(rho)) > 1e-9 * s[0]:
        rho = _normalize(null[0] if len(null) else np.linalg.svd(L)[2][-1].conj())
    return rho


def steady_states(Ls: np.ndarray, rtol: float = NULL_RTOL):
    """Batched :func:`steady_state`.

    Returns ``(rhos, errors)``; entries listed in ``errors`` (index to
    exception) are filled with NaN in ``rhos``.
    """
    Ls = np.asarray(Ls)
    K, D, _ = Ls.shape
    dim = int(round(np.sqrt(D)))
    s = np.linalg.svd(Ls, compute_uv=False)
    nullity = (s < rtol * s[:, :1]).sum(axis=1)
    with np.errstate(all="ignore"):
        v = _kernels.steady_state_batch(Ls, trace_row(dim))
        rhos = v.reshape(K, dim, dim).transpose(0, 2, 1)
        rhos = rhos / np.trace(rhos, axis1=1, axis2=2)[:, None, None]
        rhos = 0.5 * (rhos + rhos.conj().transpose(0, 2, 1))
        resid = np.linalg.norm(np.einsum("kab,kb->ka", Ls, rhos.transpose(0, 2, 1).reshape(K, D)), axis=1)
    errors: dict[int, Exception] = {}
    for k in np.flatnonzero(nullity > 1):
        try:
            steady_state(Ls[k], rtol)
        except DegenerateSteadyState as exc:
            errors[int(k)] = exc
        rhos[k] = np.nan
    redo = (nullity <= 1) & ~(resid <= 1e-9 * s[:, 0])
    for k in np.flatnonzero(redo):
        rhos[k] = steady_state(Ls[k], rtol)
    return rhos, errors


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """``Tr(op rho)``."""
    rho, op = np.asarray(rho), np.asarray(op)
    if rho.shape != op.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape}, operator {op.shape}")
    return complex(np.trace(op @ rho))
