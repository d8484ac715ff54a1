"""Transmon parameters and their mapping to two-level simulator inputs.

Energies and frequencies are in GHz (E/h), flux in units of the flux quantum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

# transmon regime lower bound on E_J / E_C
MIN_EJ_EC_RATIO = 20.0


def derive_energies(f_max: float, anharmonicity: float) -> tuple[float, float]:
    """Invert the transmon relations for ``(E_J, E_C)``.

    Uses ``E_C = -anharmonicity`` and ``f_max = sqrt(8 E_J E_C) - E_C``.
    """
    if f_max <= 0:
        raise ValueError(f"f_max must be positive, got {f_max}")
    if anharmonicity >= 0:
        raise ValueError(f"anharmonicity must be negative, got {anharmonicity}")
    if -anharmonicity >= f_max:
        raise ValueError("|anharmonicity| must be smaller than f_max")
    e_c = -anharmonicity
    e_j = (f_max + e_c) ** 2 / (8.0 * e_c)
    return e_j, e_c


@dataclass(frozen=True)
class TransmonParams:
    f_max: float
    anharmonicity: float
    E_J: float
    E_C: float
    g: float

    def __post_init__(self):
        if not (self.E_C > 0 and self.E_J > 0):
            raise ValueError("E_J and E_C must be positive")
        if self.E_J / self.E_C <= MIN_EJ_EC_RATIO:
            raise ValueError(
                f"E_J/E_C = {self.E_J / self.E_C:.2f} is outside the transmon regime"
            )
        if self.anharmonicity >= 0:
            raise ValueError("anharmonicity must be negative")
        if not 0 < self.g < 1:
            raise ValueError(f"coupling g must lie in (0, 1), got {self.g}")

    @classmethod
    def from_spectroscopy(cls, f_max: float, anharmonicity: float, g: float) -> "TransmonParams":
        e_j, e_c = derive_energies(f_max, anharmonicity)
        return cls(f_max=f_max, anharmonicity=anharmonicity, E_J=e_j, E_C=e_c, g=g)


@dataclass(frozen=True)
class LineParams:
    """Transmission line seen by one qubit (SI units)."""

    c_t: float  # capacitance per length, F/m
    v: float  # phase velocity, m/s
    c_g: float  # qubit-line coupling capacitance, F

    def __post_init__(self):
        if min(self.c_t, self.v, self.c_g) <= 0:
            raise ValueError("line parameters must be strictly positive")


def frequency_at_flux(p: TransmonParams, phi: float) -> float:
    """Transition frequency (GHz) at flux ``phi`` for a symmetric transmon."""
    f = np.sqrt(8.0 * p.E_J * p.E_C * abs(np.cos(np.pi * phi))) - p.E_C
    if not f > 0:
        raise ValueError(f"model invalid at flux {phi}: frequency {f:.4g} GHz <= 0")
    return float(f)


def flux_at_frequency(p: TransmonParams, f: float) -> float:
    """Flux on the branch ``[0, 0.5)`` where the qubit sits at frequency ``f``."""
    c = (f + p.E_C) ** 2 / (8.0 * p.E_J * p.E_C)
    if not 0 < c <= 1 + 1e-15 or f <= 0:
        raise ValueError(f"frequency {f} GHz is not reachable (f_max = {p.f_max})")
    return float(np.arccos(min(c, 1.0)) / np.pi)


def coupling_g(p: TransmonParams, line: LineParams) -> float:
    """Dimensionless qubit-line coupling from line and junction parameters."""
    e, hbar = constants.e, constants.hbar
    prefactor = np.sqrt(e**2 * line.c_t / (2 * hbar * np.pi * line.v * line.c_g**2))
    return float(prefactor * (p.E_J / (8.0 * p.E_C)) ** 0.25)


def coupling_capacitance_for(p: TransmonParams, c_t: float, v: float, g: float) -> float:
    """``c_g`` that makes :func:`coupling_g` return ``g`` for the given line."""
    e, hbar = constants.e, constants.hbar
    return float(
        np.sqrt(e**2 * c_t / (2 * hbar * np.pi * v)) * (p.E_J / (8.0 * p.E_C)) ** 0.25 / g
    )


def _interp_rate(table: dict[float, float], f: float) -> float:
    keys = np.array(sorted(table))
    vals = np.array([table[k] for k in keys])
    return float(np.interp(f, keys, vals))


@dataclass(frozen=True)
class QubitConfig:
    """One qubit as described in a scenario file.

    ``gamma1_MHz_by_freq`` maps operating frequency (GHz) to the radiative
    rate gamma_1/2pi (MHz); it is interpolated piecewise-linearly between
    entries and held constant beyond them.
    """

    transmon: TransmonParams
    gamma1_MHz_by_freq: dict[float, float]
    flux_slope: float = 1.0
    flux_offset: float = 0.0
    gamma_nr_MHz: float = 0.0
    gamma_phi_MHz: float = 0.0
    freq_GHz: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "QubitConfig":
        missing = [k for k in ("f_max_GHz", "anharmonicity_GHz", "g", "gamma1_MHz_by_freq") if k not in d]
        if missing:
            raise KeyError(", ".join(missing))
        tp = TransmonParams.from_spectroscopy(d["f_max_GHz"], d["anharmonicity_GHz"], d["g"])
        table = {float(k): float(v) for k, v in d["gamma1_MHz_by_freq"].items()}
        if not table:
            raise ValueError("gamma1_MHz_by_freq must not be empty")
        return cls(
            transmon=tp,
            gamma1_MHz_by_freq=table,
            flux_slope=float(d.get("flux_slope", 1.0)),
            flux_offset=float(d.get("flux_offset", 0.0)),
            gamma_nr_MHz=float(d.get("gamma_nr_MHz", 0.0)),
            gamma_phi_MHz=float(d.get("gamma_phi_MHz", 0.0)),
            freq_GHz=None if d.get("freq_GHz") is None else float(d["freq_GHz"]),
        )

    def flux(self, voltage: float) -> float:
        return self.flux_slope * voltage + self.flux_offset

    def frequency_at_voltage(self, voltage: float) -> float:
        return frequency_at_flux(self.transmon, self.flux(voltage))

    def voltage_for_frequency(self, f: float) -> float:
        return (flux_at_frequency(self.transmon, f) - self.flux_offset) / self.flux_slope

    def gamma1(self, f: float) -> float:
        return _interp_rate(self.gamma1_MHz_by_freq, f)
