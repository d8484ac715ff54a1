"""Scenario configs, figure presets, and the runner behind ``wgqed run``."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis
from .geometry import (
    DriveSpec,
    EffectiveModel,
    Geometry,
    RateSet,
    build_effective_model,
    correlated_decay,
    exchange_rate,
)
from .lindblad import NumericalError, liouvillian, steady_state
from .scattering import sweep_elastic, t_min
from .signal_proc import psd_estimate, synthesize_traces, write_trace
from .spectra import emission_spectrum, strip_coherent
from .transmon import QubitConfig

SEPARATION_MM = 18.6
GEOMETRY_PRESETS = {
    "lambda@6.4": (1.0, 6.4),
    "3lambda/4@4.8": (0.75, 4.8),
}
MEASUREMENTS = ("elastic", "psd", "trace")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ------------------------------------------------------------------ presets

PAPER_QUBITS = [
    {
        "f_max_GHz": 6.89,
        "anharmonicity_GHz": -0.298,
        "g": 0.0146,
        "flux_slope": 0.1,
        "flux_offset": 0.0,
        "gamma1_MHz_by_freq": {"4.8": 13.0, "6.4": 26.0},
    },
    {
        "f_max_GHz": 6.84,
        "anharmonicity_GHz": -0.298,
        "g": 0.0180,
        "flux_slope": 0.1,
        "flux_offset": 0.0,
        "gamma1_MHz_by_freq": {"4.8": 13.0, "6.4": 26.0},
    },
]

# gamma_nr, gamma_phi at each operating point (MHz)
PAPER_LOSSES = {6.4: (0.18, 0.2), 4.8: (1.2, 1.8)}


def _qubits(n: int, freq: float) -> list[dict]:
    nr, phi = PAPER_LOSSES[freq]
    return [dict(q, freq_GHz=freq, gamma_nr_MHz=nr, gamma_phi_MHz=phi) for q in PAPER_QUBITS[:n]]


def _voltage_window(qubit: dict, freq: float, span_MHz: float, num: int) -> dict:
    qc = QubitConfig.from_dict(qubit)
    lo = qc.voltage_for_frequency(freq + span_MHz * 1e-3)
    hi = qc.voltage_for_frequency(freq - span_MHz * 1e-3)
    return {"start": lo, "stop": hi, "num": num}


def _preset_table() -> dict[str, dict]:
    geo_l = {"d_mm": SEPARATION_MM, "preset": "lambda@6.4"}
    geo_3 = {"d_mm": SEPARATION_MM, "preset": "3lambda/4@4.8"}
    p = {
        "fig1b": {
            "qubits": _qubits(1, 6.4),
            "geometry": {"d_mm": 0.0, "preset": "lambda@6.4"},
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [1.0, 5.0, 15.0, 30.0, 60.0, 120.0]},
            "measurement": {"type": "elastic", "detuning_MHz": {"start": -100, "stop": 100, "num": 401}},
        },
        "fig1c": {
            "qubits": _qubits(1, 6.4),
            "geometry": {"d_mm": 0.0, "preset": "lambda@6.4"},
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [60.0]},
            "measurement": {
                "type": "psd",
                "ports": ["reflection"],
                "detuning_MHz": {"start": -150, "stop": 150, "num": 1201},
            },
        },
        "fig2a": {
            "qubits": _qubits(2, 6.4),
            "geometry": geo_l,
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [7.5]},
            "measurement": {
                "type": "elastic",
                "detuning_MHz": {"start": -100, "stop": 100, "num": 201},
                "sweep": {"qubit": 1, "voltage": None},
            },
        },
        "fig2b": {
            "qubits": _qubits(2, 6.4),
            "geometry": geo_l,
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [7.5]},
            "measurement": {"type": "elastic", "detuning_MHz": {"start": -100, "stop": 100, "num": 401}},
        },
        "fig2c": {
            "qubits": _qubits(2, 4.8),
            "geometry": geo_3,
            "drive": {"freq_GHz": 4.8, "rabi_MHz": [8.7]},
            "measurement": {
                "type": "elastic",
                "detuning_MHz": {"start": -60, "stop": 60, "num": 241},
                "sweep": {"qubit": 1, "voltage": None},
            },
        },
        "fig2d": {
            "qubits": _qubits(2, 4.8),
            "geometry": geo_3,
            "drive": {"freq_GHz": 4.8, "rabi_MHz": [8.7]},
            "measurement": {"type": "elastic", "detuning_MHz": {"start": -60, "stop": 60, "num": 481}},
        },
        "fig3": {
            "qubits": _qubits(2, 6.4),
            "geometry": geo_l,
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [5.0, 10.0, 20.0]},
            "measurement": {
                "type": "psd",
                "ports": ["reflection"],
                "detuning_MHz": {"start": -100, "stop": 100, "num": 2001},
                "narrow_window_MHz": 3.0,
            },
        },
        "fig4_highpower": {
            "qubits": _qubits(2, 4.8),
            "geometry": geo_3,
            "drive": {"freq_GHz": 4.8, "rabi_MHz": [15.0, 25.0]},
            "measurement": {
                "type": "psd",
                "ports": ["transmission", "reflection"],
                "detuning_MHz": {"start": -80, "stop": 80, "num": 1601},
            },
        },
        "fig4_lowpower": {
            "qubits": _qubits(2, 4.8),
            "geometry": geo_3,
            "drive": {"freq_GHz": 4.8, "rabi_MHz": [3.0, 5.0]},
            "measurement": {
                "type": "psd",
                "ports": ["transmission", "reflection"],
                "detuning_MHz": {"start": -40, "stop": 40, "num": 1601},
            },
        },
        "fig1c_traces": {
            "qubits": _qubits(1, 6.4),
            "geometry": {"d_mm": 0.0, "preset": "lambda@6.4"},
            "drive": {"freq_GHz": 6.4, "rabi_MHz": [60.0]},
            "measurement": {
                "type": "trace",
                "ports": ["reflection"],
                "detuning_MHz": {"start": -400, "stop": 400, "num": 3201},
                "n_traces": 200,
            },
        },
    }
    p["fig2a"]["measurement"]["sweep"]["voltage"] = _voltage_window(p["fig2a"]["qubits"][1], 6.4, 80, 41)
    p["fig2c"]["measurement"]["sweep"]["voltage"] = _voltage_window(p["fig2c"]["qubits"][1], 4.8, 40, 41)
    return p


PRESETS = _preset_table()


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


# ------------------------------------------------------------------ parsing


@dataclass
class Scenario:
    name: str
    qubits: list[QubitConfig]
    geometry: Geometry
    drive_freq_GHz: float
    rabi_MHz: list[float]
    port: str
    measurement: dict[str, Any]
    residual_dephasing_MHz: float = 0.0
    seed: int = 0

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def qubit_freqs(self, sweep_value: float | None = None) -> list[float]:
        sweep = self.measurement.get("sweep")
        freqs = []
        for j, q in enumerate(self.qubits):
            if sweep is not None and sweep_value is not None and j == sweep["qubit"]:
                freqs.append(q.frequency_at_voltage(sweep_value))
            elif q.freq_GHz is not None:
                freqs.append(q.freq_GHz)
            else:
                freqs.append(q.transmon.f_max)
        return freqs

    def rates(self, freqs: list[float]) -> RateSet:
        res = self.residual_dephasing_MHz
        return RateSet(
            tuple(q.gamma1(f) for q, f in zip(self.qubits, freqs)),
            tuple(q.gamma_nr_MHz for q in self.qubits),
            tuple(q.gamma_phi_MHz + res for q in self.qubits),
        )

    def model(self, drive_freq_GHz: float, rabi_MHz: float, sweep_value: float | None = None) -> EffectiveModel:
        freqs = self.qubit_freqs(sweep_value)
        return build_effective_model(
            freqs, self.geometry, self.rates(freqs), DriveSpec(drive_freq_GHz, rabi_MHz, self.port)
        )

    def detuning_grid(self) -> np.ndarray:
        g = self.measurement["detuning_MHz"]
        return np.linspace(g["start"], g["stop"], int(g["num"]))


def _need(d: dict, key: str, path: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _grid(d: Any, path: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected {start, stop, num}")
    for k in ("start", "stop", "num"):
        _need(d, k, path)
    if int(d["num"]) < 1:
        raise ConfigError(f"{path}.num", "grid must be non-empty")
    return d


def parse_scenario(cfg: dict, name: str = "scenario") -> Scenario:
    qubits_cfg = _need(cfg, "qubits", "")
    if not isinstance(qubits_cfg, list) or not qubits_cfg:
        raise ConfigError("qubits", "at least one qubit is required")
    qubits = []
    for j, q in enumerate(qubits_cfg):
        try:
            qubits.append(QubitConfig.from_dict(q))
        except KeyError as exc:
            raise ConfigError(f"qubits[{j}]", f"missing field(s) {exc.args[0]}") from None
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"qubits[{j}]", str(exc)) from None

    geo = _need(cfg, "geometry", "")
    preset = geo.get("preset", "custom")
    if preset in GEOMETRY_PRESETS:
        d_over_lambda, ref = GEOMETRY_PRESETS[preset]
    elif preset == "custom":
        d_over_lambda = float(_need(geo, "d_over_lambda", "geometry"))
        ref = geo.get("ref_freq_GHz")
    else:
        raise ConfigError("geometry.preset", f"unknown preset {preset!r}")
    d_mm = float(geo.get("d_mm", SEPARATION_MM))
    n = len(qubits)
    if n == 1:
        geometry = Geometry((0.0,), SEPARATION_MM / d_over_lambda, ref)
    elif "positions_mm" in geo:
        if len(geo["positions_mm"]) != n:
            raise ConfigError("geometry.positions_mm", f"expected {n} positions")
        geometry = Geometry(tuple(geo["positions_mm"]), d_mm / d_over_lambda, ref)
    elif n == 2:
        if d_mm <= 0:
            raise ConfigError("geometry.d_mm", "separation must be positive")
        geometry = Geometry.from_separation(d_mm, d_over_lambda, ref)
    else:
        raise ConfigError("geometry.positions_mm", "required for more than two qubits")

    drive = _need(cfg, "drive", "")
    rabi = drive.get("rabi_MHz", [])
    rabi = [float(rabi)] if np.isscalar(rabi) else [float(x) for x in rabi]
    if not rabi or any(x < 0 for x in rabi):
        raise ConfigError("drive.rabi_MHz", "need one or more non-negative Rabi rates")
    port = drive.get("port", "left")
    if port not in ("left", "right"):
        raise ConfigError("drive.port", "must be 'left' or 'right'")

    meas = _need(cfg, "measurement", "")
    mtype = _need(meas, "type", "measurement")
    if mtype not in MEASUREMENTS:
        raise ConfigError("measurement.type", f"must be one of {MEASUREMENTS}")
    _grid(_need(meas, "detuning_MHz", "measurement"), "measurement.detuning_MHz")
    if "sweep" in meas:
        sw = meas["sweep"]
        j = _need(sw, "qubit", "measurement.sweep")
        if not 0 <= int(j) < n:
            raise ConfigError("measurement.sweep.qubit", f"qubit index {j} out of range")
        _grid(_need(sw, "voltage", "measurement.sweep"), "measurement.sweep.voltage")
        if mtype != "elastic":
            raise ConfigError("measurement.sweep", "voltage sweeps are supported for elastic measurements")
    for p in meas.get("ports", []):
        if p not in ("transmission", "reflection"):
            raise ConfigError("measurement.ports", f"unknown port {p!r}")

    return Scenario(
        name=cfg.get("name", name),
        qubits=qubits,
        geometry=geometry,
        drive_freq_GHz=float(_need(drive, "freq_GHz", "drive")),
        rabi_MHz=rabi,
        port=port,
        measurement=meas,
        residual_dephasing_MHz=float(cfg.get("residual_dephasing_MHz", 0.0)),
        seed=int(cfg.get("seed", 0)),
    )


def load_config(path: str | Path | None, preset: str | None) -> dict:
    cfg: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
        cfg = deep_merge(PRESETS[preset], {"name": preset})
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(str(path), f"cannot read config: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(str(path), "top level must be an object")
        if "preset" in user and preset is None:
            name = user.pop("preset")
            if name not in PRESETS:
                raise ConfigError("preset", f"unknown preset {name!r}")
            cfg = deep_merge(PRESETS[name], {"name": name})
        cfg = deep_merge(cfg, user)
    if not cfg:
        raise ConfigError("scenario", "give a scenario file or --preset")
    return cfg


# ------------------------------------------------------------------ summary


def derived_quantities(sc: Scenario) -> dict[str, Any]:
    """Rates implied by the configured model at the drive centre frequency."""
    freqs = sc.qubit_freqs()
    rates = sc.rates(freqs)
    out: dict[str, Any] = {
        "qubit_freqs_GHz": freqs,
        "t_min": [t_min(g, nr, ph) for g, nr, ph in zip(rates.gamma1, rates.gamma_nr, rates.gamma_phi)],
    }
    if sc.n_qubits == 2:
        ga, gb = rates.gamma1
        x = sc.geometry.d_over_lambda(sc.drive_freq_GHz)
        g12 = correlated_decay(ga, gb, x)
        mean_loss = 0.5 * (ga + gb + sum(rates.gamma_nr))
        transfer = 0.5 * sum(rates.gamma_phi)
        out.update(
            d_over_lambda=x,
            two_J_MHz=2 * exchange_rate(ga, gb, x),
            gamma_12_MHz=g12,
            gamma_B_MHz=mean_loss + g12 + transfer,
            gamma_D_MHz=mean_loss - g12 + transfer,
        )
    return out


# ------------------------------------------------------------------ runner


@dataclass
class RunResult:
    summary: dict[str, Any]
    files: list[Path]
    errors: list[str]


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


def run(sc: Scenario, out_dir: str | Path, threads: int = 1, seed: int | None = None) -> RunResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = sc.seed if seed is None else seed
    files: list[Path] = []
    errors: list[str] = []
    summary: dict[str, Any] = {"name": sc.name, "measurement": sc.measurement["type"], "seed": seed}
    summary["derived"] = derived_quantities(sc)
    freqs = sc.drive_freq_GHz + sc.detuning_grid() * 1e-3
    mtype = sc.measurement["type"]

    for rabi in sc.rabi_MHz:
        tag = f"{sc.name}_rabi{_tag(rabi)}"
        if mtype == "elastic":
            sweep_cfg = sc.measurement.get("sweep")
            if sweep_cfg:
                v = sweep_cfg["voltage"]
                values = np.linspace(v["start"], v["stop"], int(v["num"]))
                model_at = lambda f, val, rabi=rabi: sc.model(f, rabi, val)
            else:
                values = np.array([0.0])
                model_at = lambda f, _, rabi=rabi: sc.model(f, rabi)
            sweep = sweep_elastic(model_at, freqs, values, workers=threads)
            path = out / f"{tag}.csv"
            sweep.write_csv(path)
            files.append(path)
            errors += [f"{tag} point {k}: {msg}" for k, msg in sweep.errors.items()]
            T, R = sweep.T, sweep.R
            ok = np.isfinite(T)
            summary.setdefault("elastic", {})[str(rabi)] = {
                "min_T": float(T[ok].min()) if ok.any() else None,
                "max_R": float(R[ok].max()) if ok.any() else None,
                "min_T_plus_R": float((T + R)[ok].min()) if ok.any() else None,
            }
        else:
            try:
                model = sc.model(sc.drive_freq_GHz, rabi)
                L = liouvillian(model)
                rho = steady_state(L)
            except (NumericalError, ValueError) as exc:
                errors.append(f"{tag}: {exc}")
                continue
            ports = sc.measurement.get("ports", ["reflection"])
            info = {}
            for port in ports:
                trace = emission_spectrum(model, port, freqs, L=L, rho=rho)
                if sc.measurement.get("strip_coherent", True):
                    trace = strip_coherent(trace)
                entry = {
                    "peak_separation_MHz": analysis.peak_separation(trace.offsets_MHz, trace.psd),
                    "peaks_MHz": analysis.peak_positions(trace.offsets_MHz, trace.psd, 3).tolist(),
                }
                window = sc.measurement.get("narrow_window_MHz")
                if window:
                    fine = sc.drive_freq_GHz + np.linspace(-window, window, 601) * 1e-3
                    ft = emission_spectrum(model, port, fine, L=L, rho=rho)
                    try:
                        nf = analysis.fit_narrow_feature(ft.offsets_MHz, ft.psd, 0.5)
                        entry["narrow_fwhm_MHz"] = nf.fwhm
                        entry["narrow_decay_rate_MHz"] = nf.decay_rate
                    except RuntimeError as exc:
                        errors.append(f"{tag} narrow-feature fit: {exc}")
                info[port] = entry
                if mtype == "psd":
                    csv_path = out / f"{tag}_{port}.csv"
                    json_path = out / f"{tag}_{port}.json"
                    meta = {"rabi_MHz": rabi, "qubit_freqs_GHz": list(model.qubit_freqs_GHz)}
                    trace = replace(trace, metadata=meta)
                    trace.write(csv_path, json_path)
                    files += [csv_path, json_path]
                else:
                    n_traces = int(sc.measurement.get("n_traces", 100))
                    full = emission_spectrum(model, port, freqs, L=L, rho=rho)
                    first_path = out / f"{tag}_{port}_trace0.bin"
                    traces = synthesize_traces(full, n_traces, seed)
                    first = next(traces)
                    files += list(write_trace(first, first_path))

                    def chain(first=first, rest=traces):
                        yield first
                        yield from rest

                    est = psd_estimate(chain())
                    psd_path = out / f"{tag}_{port}_psd.csv"
                    est.write_csv(psd_path)
                    files.append(psd_path)
                    entry["n_traces"] = n_traces
            summary.setdefault("spectra", {})[str(rabi)] = info

    summary_path = out / f"{sc.name}_summary.json"
    summary["errors"] = errors
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=float))
    files.append(summary_path)
    return RunResult(summary, files, errors)
