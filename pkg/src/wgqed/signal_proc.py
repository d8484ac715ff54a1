"""Emulated detection chain: I/Q trace synthesis, FFT power spectra,
digital down-conversion and background correction.

Frequencies in this module are MHz and PSDs are per MHz, so that
``sum(psd) * bin_width`` is the mean sample power.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .spectra import SpectrumTrace

DEFAULT_RATE_GSPS = 1.0
DEFAULT_DURATION_NS = 8192.0
DEFAULT_IF_MHZ = 25.0


@dataclass(frozen=True, eq=False)
class TraceRecord:
    samples: np.ndarray  # complex I + iQ
    rate_GSps: float
    duration_ns: float
    seed: int | None = None

    def __post_init__(self):
        n = self.rate_GSps * self.duration_ns
        if abs(n - round(n)) > 1e-9 or len(self.samples) != round(n):
            raise ValueError(
                f"{len(self.samples)} samples do not match rate {self.rate_GSps} GS/s "
                f"x duration {self.duration_ns} ns"
            )

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def rate_MHz(self) -> float:
        return self.rate_GSps * 1e3

    @property
    def times_us(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.rate_MHz


def background_correct(t_p: complex, r_p: complex, t_bg: complex, r_bg: complex) -> tuple[float, float]:
    """Transmittance and reflectance normalized by the background power."""
    norm = abs(t_bg) ** 2 + abs(r_bg) ** 2
    if norm <= 0:
        raise ZeroDivisionError("background transmission and reflection both vanish")
    return abs(t_p) ** 2 / norm, abs(r_p) ** 2 / norm


def synthesize_trace(
    spectrum: SpectrumTrace,
    seed: int | np.random.SeedSequence,
    rate_GSps: float = DEFAULT_RATE_GSPS,
    duration_ns: float = DEFAULT_DURATION_NS,
    f_if_MHz: float = DEFAULT_IF_MHZ,
) -> TraceRecord:
    """One stationary complex Gaussian record with the spectrum's PSD.

    The drive frequency maps to ``f_if_MHz``; the coherent weight becomes a
    tone of power ``coherent_weight`` with zero phase at ``t = 0``.
    """
    n = int(round(rate_GSps * duration_ns))
    rate = rate_GSps * 1e3
    offsets = spectrum.offsets_MHz
    band = offsets[spectrum.psd > 0] + f_if_MHz
    if abs(f_if_MHz) >= rate / 2 or np.any(np.abs(band) >= rate / 2):
        raise ValueError("spectrum band exceeds the Nyquist range after down-conversion")

    fk = np.fft.fftfreq(n, d=1 / rate)
    target = np.interp(fk - f_if_MHz, offsets, spectrum.psd, left=0.0, right=0.0)
    target = np.clip(target, 0.0, None)

    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    x = np.fft.ifft(np.sqrt(target * n * rate) * z)
    if spectrum.coherent_weight > 0:
        t = np.arange(n) / rate
        x = x + np.sqrt(spectrum.coherent_weight) * np.exp(2j * np.pi * f_if_MHz * t)
    return TraceRecord(x, rate_GSps, duration_ns, seed if isinstance(seed, int) else None)


def synthesize_traces(spectrum: SpectrumTrace, count: int, seed: int, **kwargs):
    """Yield ``count`` independent records from one master seed."""
    for child in np.random.SeedSequence(seed).spawn(count):
        yield synthesize_trace(spectrum, child, **kwargs)


@dataclass(frozen=True, eq=False)
class PSDEstimate:
    freqs_MHz: np.ndarray  # fftshift-ordered
    psd: np.ndarray
    n_traces: int

    @property
    def bin_width_MHz(self) -> float:
        return float(self.freqs_MHz[1] - self.freqs_MHz[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_MHz", "psd"])
            for f, s in zip(self.freqs_MHz, self.psd):
                w.writerow([repr(float(f)), repr(float(s))])


def psd_estimate(traces: Iterable[TraceRecord] | TraceRecord) -> PSDEstimate:
    """Average periodogram ``|FFT|^2 / (N rate)`` over equal-length traces."""
    if isinstance(traces, TraceRecord):
        traces = [traces]
    acc = None
    count = 0
    for tr in traces:
        if acc is None:
            n, rate = tr.n_samples, tr.rate_MHz
            acc = np.zeros(n)
        elif tr.n_samples != n or tr.rate_MHz != rate:
            raise ValueError("all traces must share length and sample rate")
        acc += np.abs(np.fft.fft(tr.samples)) ** 2
        count += 1
    if count == 0:
        raise ValueError("psd_estimate needs at least one trace")
    psd = acc / (count * n * rate)
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=1 / rate))
    return PSDEstimate(freqs, np.fft.fftshift(psd), count)


def digital_downconvert(trace: TraceRecord, f_if_MHz: float = DEFAULT_IF_MHZ) -> complex:
    """Complex amplitude of the ``f_if`` component (rectangular window)."""
    if abs(f_if_MHz) >= trace.rate_MHz / 2:
        raise ValueError("intermediate frequency outside the sampled band")
    ref = np.exp(-2j * np.pi * f_if_MHz * trace.times_us)
    return complex(np.mean(trace.samples * ref))


def write_trace(trace: TraceRecord, path) -> tuple[Path, Path]:
    """Little-endian interleaved float32 I/Q plus a JSON sidecar."""
    path = Path(path)
    iq = np.empty(2 * trace.n_samples, dtype="<f4")
    iq[0::2] = trace.samples.real
    iq[1::2] = trace.samples.imag
    iq.tofile(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(
        json.dumps({"rate": trace.rate_GSps, "duration": trace.duration_ns, "seed": trace.seed}, indent=2)
    )
    return path, sidecar


def read_trace(path) -> TraceRecord:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    iq = np.fromfile(path, dtype="<f4")
    samples = iq[0::2].astype(np.float64) + 1j * iq[1::2].astype(np.float64)
    return TraceRecord(samples, meta["rate"], meta["duration"], meta.get("seed"))
