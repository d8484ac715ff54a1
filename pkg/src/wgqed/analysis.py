"""Line-shape extraction from computed curves: widths, peaks, splittings."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks


def _curve_fit(*args, **kwargs):
    # noiseless model curves leave the covariance undefined; only popt is used
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        return curve_fit(*args, **kwargs)[0]


def lorentzian(x, amplitude, fwhm, center, offset=0.0):
    hw = 0.5 * fwhm
    return amplitude * hw**2 / ((x - center) ** 2 + hw**2) + offset


def fit_lorentzian_fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """FWHM of a single Lorentzian peak fitted to ``y(x)``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    k = int(np.argmax(y))
    above = x[y >= 0.5 * y[k]]
    guess = max(above.max() - above.min(), np.diff(x).min())
    popt = _curve_fit(lambda x, a, w, c: lorentzian(x, a, w, c), x, y, p0=[y[k], guess, x[k]], maxfev=20000)
    return abs(popt[1])


@dataclass(frozen=True)
class NarrowFeature:
    amplitude: float
    fwhm: float
    center: float

    @property
    def decay_rate(self) -> float:
        """Rate of the correlation mode behind the line (its half width)."""
        return 0.5 * self.fwhm


def fit_narrow_feature(x: np.ndarray, y: np.ndarray, width_guess: float) -> NarrowFeature:
    """Fit a narrow Lorentzian on a slowly varying quadratic background."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    k = int(np.argmin(np.abs(x)))
    edge = 0.5 * (y[0] + y[-1])

    def model(x, a, w, c, b0, b1, b2):
        return lorentzian(x, a, w, c) + b0 + b1 * x + b2 * x**2

    popt = _curve_fit(model, x, y, p0=[y[k] - edge, width_guess, x[k], edge, 0.0, 0.0], maxfev=20000)
    return NarrowFeature(amplitude=popt[0], fwhm=abs(popt[1]), center=popt[2])


def peak_positions(x: np.ndarray, y: np.ndarray, count: int = 2) -> np.ndarray:
    """Locations of the ``count`` most prominent local maxima, sorted by ``x``."""
    y = np.asarray(y, float)
    idx, props = find_peaks(y, prominence=0)
    if idx.size == 0:
        return np.array([])
    best = idx[np.argsort(props["prominences"])[::-1][:count]]
    return np.sort(np.asarray(x)[best])


def peak_separation(x: np.ndarray, y: np.ndarray) -> float:
    """Distance between the two most prominent peaks; 0 for a single peak."""
    p = peak_positions(x, y, 2)
    return float(p[-1] - p[0]) if p.size == 2 else 0.0


def refine_peak(x: np.ndarray, y: np.ndarray, k: int) -> float:
    """Parabolic interpolation of a sampled maximum at index ``k``."""
    if k == 0 or k == len(y) - 1:
        return float(x[k])
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    return float(x[k] + shift * (x[k + 1] - x[k]))
