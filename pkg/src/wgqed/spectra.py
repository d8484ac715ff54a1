"""Resonance-fluorescence power spectra from the quantum regression theorem.

The incoherent spectrum at offset ``f = nu - nu_drive`` (MHz) is

    S(f) = (1/pi) Re Tr[ b^+ (i f - L)^-1 (b rho - <b> rho) ]

with ``b`` the port field. It integrates over ``f`` to the incoherent photon
flux ``<b^+ b> - |<b>|^2``, in the MHz rate units used for the decay rates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .geometry import EffectiveModel
from .lindblad import NumericalError, liouvillian, steady_state, trace_row
from .operators import vec

PORTS = ("transmission", "reflection")


@dataclass(frozen=True, eq=False)
class SpectrumTrace:
    freqs_GHz: np.ndarray
    psd: np.ndarray  # incoherent part, per MHz
    coherent_weight: float  # delta-function weight at the drive frequency
    drive_freq_GHz: float
    port: str
    metadata: dict | None = None

    @property
    def offsets_MHz(self) -> np.ndarray:
        return (self.freqs_GHz - self.drive_freq_GHz) * 1e3

    def incoherent_power(self) -> float:
        return float(np.trapezoid(self.psd, self.offsets_MHz))

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_GHz", "psd_incoherent", "coherent_weight_at_drive"])
            for k, (f, s) in enumerate(zip(self.freqs_GHz, self.psd)):
                w.writerow([repr(float(f)), repr(float(s)), repr(self.coherent_weight) if k == 0 else ""])
        if json_path is not None:
            meta = {
                "port": self.port,
                "drive_freq_GHz": self.drive_freq_GHz,
                "coherent_weight": self.coherent_weight,
                **(self.metadata or {}),
            }
            with open(json_path, "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)


def _port_field(model: EffectiveModel, port: str) -> np.ndarray:
    if port not in PORTS:
        raise ValueError(f"port must be one of {PORTS}, got {port!r}")
    return model.port_operator(port)


def coherent_amplitude(model: EffectiveModel, rho: np.ndarray, port: str) -> complex:
    """``<b_out>`` at the port; transmission includes the input field."""
    b = _port_field(model, port)
    scattered = -1j * np.trace(b @ rho)
    if port == "transmission":
        return complex(model.input_amplitude + scattered)
    return complex(scattered)


def incoherent_flux(model: EffectiveModel, port: str, rho: np.ndarray | None = None) -> float:
    """``<b^+ b> - |<b>|^2`` in the steady state."""
    if rho is None:
        rho = steady_state(liouvillian(model))
    b = _port_field(model, port)
    return float((np.trace(b.conj().T @ b @ rho) - abs(np.trace(b @ rho)) ** 2).real)


def emission_spectrum(
    model: EffectiveModel,
    port: str,
    freqs_GHz: Sequence[float],
    L: np.ndarray | None = None,
    rho: np.ndarray | None = None,
) -> SpectrumTrace:
    """Incoherent PSD and coherent weight radiated into ``port``."""
    freqs = np.asarray(freqs_GHz, dtype=float)
    if L is None:
        L = liouvillian(model)
    if rho is None:
        rho = steady_state(L)
    b = _port_field(model, port)
    mean_b = np.trace(b @ rho)
    seed = vec(b @ rho - mean_b * rho)
    weights = vec(b.conj())  # Tr(b^+ Y) = vec(conj(b)) . vec(Y)

    # deflate the stationary mode so that f = 0 is regular
    shift = np.abs(L).max()
    Lp = L - shift * np.outer(vec(rho), trace_row(model.dim))

    offsets = (freqs - model.drive_freq_GHz) * 1e3
    vals = _kernels.resolvent_sweep(Lp, seed, weights, offsets)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("resolvent solve produced non-finite values")
    return SpectrumTrace(
        freqs_GHz=freqs,
        psd=vals.real / np.pi,
        coherent_weight=abs(coherent_amplitude(model, rho, port)) ** 2,
        drive_freq_GHz=model.drive_freq_GHz,
        port=port,
    )


def strip_coherent(trace: SpectrumTrace) -> SpectrumTrace:
    """Remove the Rayleigh (elastic) delta peak."""
    return replace(trace, coherent_weight=0.0)


def wide_grid(center_GHz: float, half_width_MHz: float, n: int, scale_MHz: float) -> np.ndarray:
    """Frequency grid dense near ``center`` and with Lorentzian-adapted tails.

    Points are ``scale * tan(theta)`` for uniform ``theta``, truncated at
    ``half_width``; suited to integrating spectra with slowly decaying tails.
    """
    theta_max = np.arctan(half_width_MHz / scale_MHz)
    theta = np.linspace(-theta_max, theta_max, n)
    return center_GHz + scale_MHz * np.tan(theta) * 1e-3
