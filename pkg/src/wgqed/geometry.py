"""Distance-dependent couplings and assembly of the effective N-qubit model.

Rates are gamma/2pi in MHz and frequencies in GHz; the Hamiltonian and
dissipator produced here are in the same MHz (cyclic) units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import lowering, number, raising

PORTS = ("left", "right")


def exchange_rate(gamma1_a: float, gamma1_b: float, d_over_lambda: float) -> float:
    """Photon-mediated exchange coupling J (MHz).

    Carries the sign of ``sin(2 pi d / lambda)``; only ``|2J|`` is observable.
    """
    if gamma1_a < 0 or gamma1_b < 0:
        raise ValueError("rates must be non-negative")
    return 0.5 * np.sqrt(gamma1_a * gamma1_b) * np.sin(2 * np.pi * d_over_lambda)


def correlated_decay(gamma1_a: float, gamma1_b: float, d_over_lambda: float) -> float:
    """Correlated (collective) decay rate gamma_12 (MHz)."""
    if gamma1_a < 0 or gamma1_b < 0:
        raise ValueError("rates must be non-negative")
    return np.sqrt(gamma1_a * gamma1_b) * np.cos(2 * np.pi * d_over_lambda)


@dataclass(frozen=True)
class Geometry:
    """Qubit positions along the line and the photon wavelength.

    ``wavelength_mm`` is the wavelength at ``ref_freq_GHz``. With a reference
    frequency the line is taken as dispersionless, ``lambda ~ 1/f``; without
    one the wavelength is the same at every frequency.
    """

    positions_mm: tuple[float, ...]
    wavelength_mm: float
    ref_freq_GHz: float | None = None

    def __post_init__(self):
        if self.wavelength_mm <= 0:
            raise ValueError("wavelength must be positive")
        if len(self.positions_mm) == 0:
            raise ValueError("at least one qubit position is required")
        object.__setattr__(self, "positions_mm", tuple(float(x) for x in self.positions_mm))

    @classmethod
    def from_separation(
        cls, d_mm: float, d_over_lambda: float, ref_freq_GHz: float | None = None
    ) -> "Geometry":
        """Two qubits ``d_mm`` apart with ``d/lambda`` given at ``ref_freq_GHz``."""
        if d_over_lambda <= 0:
            raise ValueError("d/lambda must be positive")
        return cls((0.0, d_mm), d_mm / d_over_lambda, ref_freq_GHz)

    @property
    def n_qubits(self) -> int:
        return len(self.positions_mm)

    @property
    def d(self) -> float:
        x = self.positions_mm
        if len(x) != 2:
            raise ValueError("separation is defined for two qubits")
        return abs(x[1] - x[0])

    def wavelength_at(self, freq_GHz: float) -> float:
        if self.ref_freq_GHz is None:
            return self.wavelength_mm
        return self.wavelength_mm * self.ref_freq_GHz / freq_GHz

    def d_over_lambda(self, freq_GHz: float) -> float:
        return self.d / self.wavelength_at(freq_GHz)

    def phases(self, freq_GHz: float, port: str = "left") -> np.ndarray:
        """Propagation phases ``2 pi x_j / lambda`` measured from the first
        qubit seen from the input ``port``."""
        if port not in PORTS:
            raise ValueError(f"port must be one of {PORTS}, got {port!r}")
        x = np.asarray(self.positions_mm)
        x0 = x.min() if port == "left" else x.max()
        return 2 * np.pi * np.abs(x - x0) / self.wavelength_at(freq_GHz)


@dataclass(frozen=True)
class RateSet:
    """Per-qubit radiative, nonradiative and pure-dephasing rates (MHz)."""

    gamma1: tuple[float, ...]
    gamma_nr: tuple[float, ...]
    gamma_phi: tuple[float, ...]

    def __post_init__(self):
        n = len(self.gamma1)
        for name in ("gamma1", "gamma_nr", "gamma_phi"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != n:
                raise ValueError(f"{name} has {len(vals)} entries, expected {n}")
            if any(v < 0 for v in vals):
                raise ValueError(f"{name} must be non-negative")
            object.__setattr__(self, name, vals)

    @classmethod
    def uniform(cls, n: int, gamma1: float, gamma_nr: float = 0.0, gamma_phi: float = 0.0):
        return cls((gamma1,) * n, (gamma_nr,) * n, (gamma_phi,) * n)

    @property
    def n_qubits(self) -> int:
        return len(self.gamma1)


@dataclass(frozen=True)
class DriveSpec:
    freq_GHz: float
    rabi_MHz: float
    port: str = "left"

    def __post_init__(self):
        if self.rabi_MHz < 0:
            raise ValueError("Rabi rate must be non-negative")
        if self.port not in PORTS:
            raise ValueError(f"port must be one of {PORTS}")


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    """Drive-frame model of N qubits coupled through the line.

    ``dissipator[i, j]`` multiplies ``s_i rho s_j^+ - {s_j^+ s_i, rho}/2``;
    ``drive[j]`` is the complex Rabi amplitude ``Omega_j exp(i phi_j)``.
    """

    drive_freq_GHz: float
    qubit_freqs_GHz: np.ndarray
    detunings: np.ndarray
    exchange: np.ndarray
    dissipator: np.ndarray
    dephasing: np.ndarray
    drive: np.ndarray
    phases: np.ndarray
    gamma1: np.ndarray
    rabi: float

    @property
    def n_qubits(self) -> int:
        return len(self.detunings)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def hamiltonian(self) -> np.ndarray:
        n = self.n_qubits
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(n):
            h -= self.detunings[j] * number(j, n)
            h += 0.5 * (self.drive[j] * raising(j, n) + np.conj(self.drive[j]) * lowering(j, n))
            for i in range(j):
                if self.exchange[i, j]:
                    hop = raising(i, n) @ lowering(j, n)
                    h += self.exchange[i, j] * (hop + hop.conj().T)
        return h

    def port_coefficients(self, port: str) -> np.ndarray:
        """Weights ``c_j`` of the outgoing field ``b = sum_j c_j s_j``.

        ``port`` is ``"transmission"`` (forward) or ``"reflection"``.
        """
        if port == "transmission":
            sign = -1.0
        elif port == "reflection":
            sign = 1.0
        else:
            raise ValueError(f"unknown port {port!r}")
        return np.sqrt(self.gamma1 / 2) * np.exp(sign * 1j * self.phases)

    def port_operator(self, port: str) -> np.ndarray:
        c = self.port_coefficients(port)
        return sum(c[j] * lowering(j, self.n_qubits) for j in range(self.n_qubits))

    @property
    def input_amplitude(self) -> float:
        """Coherent input field amplitude, ``|alpha|^2`` being the photon flux."""
        return self.rabi / np.sqrt(2 * self.gamma1[0]) if self.gamma1[0] > 0 else 0.0


def radiative_matrix(gamma1: Sequence[float], phases: Sequence[float]) -> np.ndarray:
    g = np.sqrt(np.outer(gamma1, gamma1))
    dphi = np.subtract.outer(phases, phases)
    return g * np.cos(dphi)


def build_effective_model(
    qubit_freqs_GHz: Sequence[float],
    geometry: Geometry,
    rates: RateSet,
    drive: DriveSpec,
) -> EffectiveModel:
    """Assemble detunings, exchange couplings, dissipator and drive.

    Couplings and propagation phases are all evaluated at the drive
    wavelength; the drive amplitude on qubit j is
    ``Omega * sqrt(gamma1_j / gamma1_0)``, qubit 0 being the reference.
    """
    freqs = np.asarray(qubit_freqs_GHz, dtype=float)
    n = len(freqs)
    if geometry.n_qubits != n or rates.n_qubits != n:
        raise ValueError(
            f"dimension mismatch: {n} frequencies, {geometry.n_qubits} positions, "
            f"{rates.n_qubits} rate entries"
        )
    g1 = np.asarray(rates.gamma1)
    if drive.rabi_MHz > 0 and g1[0] <= 0:
        raise ValueError("reference qubit 0 needs gamma1 > 0 to define the drive")

    phases = geometry.phases(drive.freq_GHz, drive.port)
    radiative = radiative_matrix(g1, phases)
    if n > 1:
        lowest = np.linalg.eigvalsh(radiative).min()
        if lowest < -1e-12 * max(1.0, g1.max()):
            raise ValueError(f"radiative rate matrix not positive semidefinite ({lowest:.3g})")

    dissipator = radiative + np.diag(rates.gamma_nr)
    exchange = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dx = abs(phases[j] - phases[i]) / (2 * np.pi)
            exchange[i, j] = exchange[j, i] = exchange_rate(g1[i], g1[j], dx)

    amp = np.zeros(n) if drive.rabi_MHz == 0 else drive.rabi_MHz * np.sqrt(g1 / g1[0])
    return EffectiveModel(
        drive_freq_GHz=float(drive.freq_GHz),
        qubit_freqs_GHz=freqs,
        detunings=(drive.freq_GHz - freqs) * 1e3,
        exchange=exchange,
        dissipator=dissipator,
        dephasing=np.asarray(rates.gamma_phi, dtype=float),
        drive=amp * np.exp(1j * phases),
        phases=phases,
        gamma1=g1.astype(float),
        rabi=float(drive.rabi_MHz),
    )
