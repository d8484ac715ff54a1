"""Coherent transmission and reflection of a weak or strong drive."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import EffectiveModel
from .lindblad import liouvillian_batch, steady_state, liouvillian, steady_states
from .operators import lowering

CSV_COLUMNS = ("drive_freq_GHz", "flux_or_voltage", "re_t", "im_t", "re_r", "im_r", "T", "R")


@dataclass(frozen=True)
class ScatterPoint:
    drive_freq_GHz: float
    rabi_MHz: float
    t: complex
    r: complex

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2


def _coefficients(model: EffectiveModel, sigma: np.ndarray) -> tuple[complex, complex]:
    """Input-output relations for the forward and backward output fields.

    ``t = 1 - (i/Omega) sum_j sqrt(g1_j g1_0) e^{-i phi_j} <s_j>`` and
    ``r = -(i/Omega) sum_j sqrt(g1_j g1_0) e^{+i phi_j} <s_j>``.
    """
    if model.rabi <= 0:
        raise ValueError("scattering coefficients need a non-zero drive")
    w = np.sqrt(model.gamma1 * model.gamma1[0]) * sigma
    t = 1 - 1j / model.rabi * np.sum(w * np.exp(-1j * model.phases))
    r = -1j / model.rabi * np.sum(w * np.exp(1j * model.phases))
    return complex(t), complex(r)


def _lowering_expectations(model: EffectiveModel, rho: np.ndarray) -> np.ndarray:
    n = model.n_qubits
    return np.array([np.trace(lowering(j, n) @ rho) for j in range(n)])


def transmission_reflection(model: EffectiveModel) -> ScatterPoint:
    rho = steady_state(liouvillian(model))
    t, r = _coefficients(model, _lowering_expectations(model, rho))
    return ScatterPoint(model.drive_freq_GHz, model.rabi, t, r)


def weak_drive_transmission(detuning_MHz, gamma1, gamma_nr=0.0, gamma_phi=0.0):
    """Single-qubit linear-response transmission, ``detuning = f_q - f_d``."""
    gamma2 = 0.5 * (gamma1 + gamma_nr) + gamma_phi
    return 1 - 0.5 * gamma1 / (gamma2 + 1j * np.asarray(detuning_MHz))


def t_min(gamma1: float, gamma_nr: float = 0.0, gamma_phi: float = 0.0) -> float:
    """On-resonance weak-drive transmission of a single qubit."""
    return 1 - gamma1 / (gamma1 + gamma_nr + 2 * gamma_phi)


@dataclass
class ElasticSweep:
    drive_freqs_GHz: np.ndarray
    sweep_values: np.ndarray
    t: np.ndarray
    r: np.ndarray
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    @property
    def T(self) -> np.ndarray:
        return np.abs(self.t) ** 2

    @property
    def R(self) -> np.ndarray:
        return np.abs(self.r) ** 2

    def rows(self):
        for i, v in enumerate(self.sweep_values):
            for k, f in enumerate(self.drive_freqs_GHz):
                t, r = self.t[i, k], self.r[i, k]
                yield (f, v, t.real, t.imag, r.real, r.imag, abs(t) ** 2, abs(r) ** 2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in self.rows():
                w.writerow([repr(float(x)) for x in row])


def _solve_chunk(models: list[EffectiveModel]):
    rhos, errors = steady_states(liouvillian_batch(models))
    n = models[0].n_qubits
    lowers = np.array([lowering(j, n) for j in range(n)])
    sigma = np.einsum("jab,kba->kj", lowers, rhos)
    gamma1 = np.array([m.gamma1 for m in models])
    phases = np.array([m.phases for m in models])
    rabi = np.array([m.rabi for m in models])
    if np.any(rabi <= 0):
        raise ValueError("scattering coefficients need a non-zero drive")
    w = np.sqrt(gamma1 * gamma1[:, :1]) * sigma
    t = 1 - 1j / rabi * np.sum(w * np.exp(-1j * phases), axis=1)
    r = -1j / rabi * np.sum(w * np.exp(1j * phases), axis=1)
    return t, r, errors


def sweep_elastic(
    model_at: Callable[[float, float], EffectiveModel],
    drive_freqs_GHz: Sequence[float],
    sweep_values: Sequence[float] = (0.0,),
    workers: int = 1,
    chunk: int = 256,
) -> ElasticSweep:
    """Evaluate ``t`` and ``r`` on a (sweep value, drive frequency) grid.

    ``model_at(drive_freq, value)`` builds the model at one grid point, the
    value typically being a coil voltage or flux of one qubit. Points that
    fail are stored as NaN and listed in ``errors``; the sweep continues.
    """
    freqs = np.asarray(drive_freqs_GHz, dtype=float)
    values = np.asarray(sweep_values, dtype=float)
    if freqs.size == 0 or values.size == 0:
        raise ValueError("sweep grids must be non-empty")

    points = [(i, k) for i in range(values.size) for k in range(freqs.size)]
    t = np.full((values.size, freqs.size), np.nan, dtype=complex)
    r = np.full_like(t, np.nan)
    errors: dict[tuple[int, int], str] = {}

    models, kept = [], []
    for i, k in points:
        try:
            models.append(model_at(freqs[k], values[i]))
            kept.append((i, k))
        except ValueError as exc:
            errors[(i, k)] = str(exc)

    chunks = [slice(s, s + chunk) for s in range(0, len(models), chunk)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda sl: _solve_chunk(models[sl]), chunks))
    for sl, (tc, rc, errs) in zip(chunks, results):
        for off, (i, k) in enumerate(kept[sl]):
            t[i, k], r[i, k] = tc[off], rc[off]
            if off in errs:
                errors[(i, k)] = str(errs[off])
    return ElasticSweep(freqs, values, t, r, errors)
