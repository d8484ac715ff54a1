"""Command line entry point.

    wgqed run [scenario.json] [--preset NAME] [--out DIR] [--seed N] [--threads K]
    wgqed fit fit.json [--out result.json]
    wgqed presets

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .fitting import FitError, ScenarioForward
from .fitting import fit_spectrum
from .geometry import DriveSpec
from .lindblad import NumericalError
from .scenario import PRESETS, ConfigError, load_config, parse_scenario, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.scenario, args.preset)
        sc = parse_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(sc, out, threads=args.threads, seed=args.seed)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(result.summary, indent=2, sort_keys=True, default=float))
    for err in result.errors:
        print(f"error: {err}", file=sys.stderr)
    return EXIT_NUMERICAL if result.errors else EXIT_OK


def _read_data(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """First column is the frequency axis (GHz); the value column is
    ``psd_incoherent``, ``T`` or ``R``, whichever is present."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError("data_file", "no data rows")
    cols = rows[0].keys()
    xcol = "freq_GHz" if "freq_GHz" in cols else "drive_freq_GHz"
    ycol = next((c for c in ("psd_incoherent", "T", "R") if c in cols), None)
    if xcol not in cols or ycol is None:
        raise ConfigError("data_file", f"unrecognized columns {list(cols)}")
    x = np.array([float(r[xcol]) for r in rows])
    y = np.array([float(r[ycol]) for r in rows])
    return x, y


def _cmd_fit(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
        base = Path(args.config).parent
        for key in ("data_file", "scenario", "free_params", "init"):
            if key not in cfg:
                raise ConfigError(key, "missing required field")
        scen = cfg["scenario"]
        if isinstance(scen, str):
            scen_cfg = load_config(None, scen) if scen in PRESETS else load_config(base / scen, None)
        else:
            scen_cfg = load_config(None, scen.pop("preset")) if "preset" in scen else {}
            scen_cfg = {**scen_cfg, **scen} if scen_cfg else scen
        sc = parse_scenario(scen_cfg)
        x, y = _read_data(base / cfg["data_file"])
        rabi = float(cfg.get("rabi_MHz", sc.rabi_MHz[0]))
        freqs = sc.qubit_freqs()
        forward = ScenarioForward(
            tuple(freqs),
            sc.geometry,
            sc.rates(freqs),
            DriveSpec(sc.drive_freq_GHz, rabi, sc.port),
            x,
            kind=cfg.get("kind", "psd"),
            port=cfg.get("port", "reflection"),
        )
        bounds = cfg.get("bounds")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = fit_spectrum(y, forward, cfg["free_params"], cfg["init"], bounds=bounds)
    except (FitError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = json.dumps(result.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wgqed", description="Two-emitter waveguide QED simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario or figure preset")
    r.add_argument("scenario", nargs="?", help="scenario JSON (fields override the preset)")
    r.add_argument("--preset", help="embedded preset name")
    r.add_argument("--out", default="out", help="output directory")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--threads", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("fit", help="fit rates to a data file")
    f.add_argument("config", help="fit config JSON")
    f.add_argument("--out", help="write FitResult JSON here")
    f.set_defaults(func=_cmd_fit)

    ls = sub.add_parser("presets", help="list embedded presets")
    ls.set_defaults(func=lambda a: print("\n".join(sorted(PRESETS))) or EXIT_OK)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
