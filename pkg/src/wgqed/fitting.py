"""Separable least-squares fits of model rates to spectra and elastic curves.

Each dataset is modelled as ``scale * model(theta) + offset``. For a given
``theta`` the linear pair ``(scale, offset)`` is solved exactly (variable
projection) and the outer problem over the rates runs a bounded
trust-region Gauss-Newton search with finite-difference Jacobians.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .geometry import DriveSpec, Geometry, RateSet, build_effective_model
from .scattering import sweep_elastic
from .spectra import emission_spectrum

RATE_NAMES = ("gamma1", "gamma_nr", "gamma_phi")
_PARAM_RE = re.compile(r"^(gamma1|gamma_nr|gamma_phi)(?:\[(\d+)\])?$")


class FitError(RuntimeError):
    pass


class MaxIterations(FitError):
    pass


class SingularJacobian(FitError):
    def __init__(self, message: str, singular_values: np.ndarray, null_direction: dict[str, float]):
        super().__init__(message)
        self.singular_values = singular_values
        self.null_direction = null_direction


@dataclass
class FitResult:
    params: dict[str, float]
    scales: list[float]
    offsets: list[float]
    residual_norm: float
    initial_residual_norm: float
    covariance: np.ndarray
    param_names: list[str]
    iterations: int
    message: str = ""

    @property
    def scale(self) -> float:
        return self.scales[0]

    @property
    def offset(self) -> float:
        return self.offsets[0]

    def stderr(self) -> dict[str, float]:
        return dict(zip(self.param_names, np.sqrt(np.clip(np.diag(self.covariance), 0, None))))

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "stderr": self.stderr(),
            "scales": self.scales,
            "offsets": self.offsets,
            "residual_norm": self.residual_norm,
            "initial_residual_norm": self.initial_residual_norm,
            "covariance": self.covariance.tolist(),
            "iterations": self.iterations,
            "message": self.message,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _project(data: np.ndarray, model: np.ndarray, fit_scale: bool, fit_offset: bool):
    cols = []
    if fit_scale:
        cols.append(model)
    if fit_offset:
        cols.append(np.ones_like(model))
    if cols:
        a = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(a, data, rcond=None)
    else:
        coef = np.array([])
    it = iter(coef)
    scale = float(next(it)) if fit_scale else 1.0
    offset = float(next(it)) if fit_offset else 0.0
    return scale, offset, data - scale * model - offset


def fit_spectrum(
    data: np.ndarray | Sequence[np.ndarray],
    forward: Callable | Sequence[Callable],
    free_params: Sequence[str],
    init: Sequence[float],
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
    fit_scale: bool = True,
    fit_offset: bool = True,
    max_nfev: int = 200,
) -> FitResult:
    """Least-squares estimate of ``free_params``.

    ``forward(params_dict)`` returns the model curve on the data grid. Lists
    of datasets and forwards fit shared parameters jointly, each dataset
    with its own scale and offset. Rates default to a lower bound of zero.
    """
    if isinstance(data, np.ndarray) and data.ndim == 1:
        data, forward = [data], [forward]
    datasets = [np.asarray(d, dtype=float) for d in data]
    forwards = list(forward)
    if len(datasets) != len(forwards):
        raise ValueError("need one forward model per dataset")
    names = list(free_params)
    x0 = np.asarray(init, dtype=float)
    if len(x0) != len(names):
        raise ValueError("init must match free_params")
    lo, hi = (np.zeros(len(names)), np.full(len(names), np.inf)) if bounds is None else map(np.asarray, bounds)
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("initial guess outside bounds")

    def evaluate(theta):
        p = dict(zip(names, theta))
        out = []
        for d, fwd in zip(datasets, forwards):
            m = np.asarray(fwd(p), dtype=float)
            if m.shape != d.shape:
                raise ValueError(f"model grid {m.shape} does not match data {d.shape}")
            out.append(_project(d, m, fit_scale, fit_offset))
        return out

    # each dataset is normalized by its RMS so the search is scale-free
    weights = [1.0 / max(np.sqrt(np.mean(d**2)), np.finfo(float).tiny) for d in datasets]

    def raw_residual(theta):
        return np.concatenate([r for *_, r in evaluate(theta)])

    def residual(theta):
        return np.concatenate([w * r for w, (*_, r) in zip(weights, evaluate(theta))])

    r0 = raw_residual(x0)
    res = least_squares(
        residual, x0, bounds=(lo, hi), method="trf", jac="3-point", x_scale="jac", max_nfev=max_nfev,
        xtol=1e-12, ftol=1e-12, gtol=1e-12,
    )
    if res.status == 0:
        raise MaxIterations(f"no convergence after {res.nfev} evaluations")

    jac = res.jac
    s = np.linalg.svd(jac, compute_uv=False) if jac.size else np.array([1.0])
    if jac.size and s[-1] <= 1e-10 * s[0]:
        _, _, vh = np.linalg.svd(jac)
        raise SingularJacobian(
            "parameters are not identifiable from these data",
            s,
            dict(zip(names, vh[-1])),
        )
    unit = np.concatenate([np.full(d.size, 1 / w) for w, d in zip(weights, datasets)])
    jac = jac * unit[:, None]
    r_final = res.fun * unit
    dof = max(1, r0.size - len(names) - len(datasets) * (int(fit_scale) + int(fit_offset)))
    sigma2 = float(r_final @ r_final) / dof
    cov = np.linalg.pinv(jac.T @ jac) * sigma2 if jac.size else np.zeros((0, 0))

    final = evaluate(res.x)
    return FitResult(
        params=dict(zip(names, map(float, res.x))),
        scales=[f[0] for f in final],
        offsets=[f[1] for f in final],
        residual_norm=float(np.linalg.norm(r_final)),
        initial_residual_norm=float(np.linalg.norm(r0)),
        covariance=cov,
        param_names=names,
        iterations=int(res.nfev),
        message=res.message,
    )


def apply_params(rates: RateSet, params: dict[str, float]) -> RateSet:
    """Overwrite rates named ``gamma_nr`` (all qubits) or ``gamma_nr[1]``."""
    fields = {k: list(getattr(rates, k)) for k in RATE_NAMES}
    for name, value in params.items():
        m = _PARAM_RE.match(name)
        if m is None:
            raise KeyError(f"unknown fit parameter {name!r}")
        key, idx = m.group(1), m.group(2)
        if idx is None:
            fields[key] = [value] * rates.n_qubits
        else:
            fields[key][int(idx)] = value
    return RateSet(**{k: tuple(v) for k, v in fields.items()})


@dataclass(frozen=True)
class ScenarioForward:
    """Forward model on a fixed grid for one measurement configuration.

    ``kind`` is ``"psd"`` (incoherent spectrum at ``port``), ``"T"`` or
    ``"R"`` (elastic transmittance/reflectance versus drive frequency).
    """

    qubit_freqs_GHz: tuple[float, ...]
    geometry: Geometry
    rates: RateSet
    drive: DriveSpec
    grid_GHz: np.ndarray
    kind: str = "psd"
    port: str = "transmission"

    def __call__(self, params: dict[str, float]) -> np.ndarray:
        rates = apply_params(self.rates, params)
        if self.kind == "psd":
            model = build_effective_model(self.qubit_freqs_GHz, self.geometry, rates, self.drive)
            return emission_spectrum(model, self.port, self.grid_GHz).psd
        if self.kind in ("T", "R"):
            def model_at(f, _):
                drive = DriveSpec(f, self.drive.rabi_MHz, self.drive.port)
                return build_effective_model(self.qubit_freqs_GHz, self.geometry, rates, drive)

            sweep = sweep_elastic(model_at, self.grid_GHz)
            return (sweep.T if self.kind == "T" else sweep.R)[0]
        raise ValueError(f"unknown forward kind {self.kind!r}")
