"""Command-line front end.

    qeraser pattern  --config C --out DIR [--condition x+]
    qeraser sweep    --config C --out DIR [--grid gamma=0:1:21,h2=0:1:21]
    qeraser report   --config C --out DIR
    qeraser simulate --config C --out DIR [--seed N] [--setting xx --setting zz]
    qeraser analyze  EVENTS.ndjson --out DIR [--window-ps N]

Every command writes into ``--out`` (created if needed) together with a
``manifest.json`` of SHA-256 hashes.  Exit codes: 0 success, 2 configuration
error, 3 data/format error, 4 statistical-precondition failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import entanglement as ent
from . import model
from .coincidence import (
    DETECTORS,
    DegenerateFitError,
    EventFormatError,
    EventStream,
    MissingSettingsError,
    RunConfig,
    estimate_correlators,
    fit_fringes,
    grid_bins,
    histogram_conditioned,
    match_coincidences,
    simulate_events,
)
from .config import ConfigError, ExperimentConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STATS = 0, 2, 3, 4

CONDITIONS = ("none", "x+", "x-", "y+", "y-", "z+", "z-", "wp+", "wp-")


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _matrix_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def _write_manifest(out: Path) -> None:
    files = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            files[path.relative_to(out).as_posix()] = hashlib.sha256(path.read_bytes()).hexdigest()
    _dump({"files": files}, out / "manifest.json")


def condition_projector(condition: str, theta: float):
    if condition.startswith("wp"):
        return model.waveplate_projector(theta, 1 if condition[-1] == "+" else -1)
    return model.photon_projector(condition[0], 1 if condition[-1] == "+" else -1)


def parse_grid(text: str) -> dict[str, np.ndarray]:
    """``gamma=0:1:21,h2=0:1:21`` -> linspace arrays keyed by axis name."""
    axes = {"gamma": np.linspace(0, 1, 21), "h2": np.linspace(0, 1, 21)}
    for part in filter(None, (p.strip() for p in text.split(","))):
        try:
            name, rng = part.split("=")
            lo, hi, num = rng.split(":")
            lo, hi, num = float(lo), float(hi), int(num)
        except ValueError:
            raise ConfigError(f"bad grid component {part!r}; expected name=start:stop:count") from None
        if name not in axes:
            raise ConfigError(f"unknown grid axis {name!r}")
        if not (0 <= lo <= 1 and 0 <= hi <= 1 and num >= 1):
            raise ConfigError(f"grid axis {name} must lie within [0, 1]")
        axes[name] = np.linspace(lo, hi, num)
    return axes


def cmd_pattern(cfg: ExperimentConfig, out: Path, condition: str = "none") -> dict:
    p = cfg.params()
    g = cfg.geometry()
    rho = model.build_joint_state(p)
    if condition == "none":
        rho_e, prob = model.electron_state(rho), 1.0
    else:
        rho_e, prob = model.condition_on_photon(rho, condition_projector(condition, p.theta))
    pattern = model.intensity_pattern(rho_e, g, normalization=prob)
    pattern.to_csv(out / "pattern.csv")
    sidecar = {
        "condition": condition,
        "probability": prob,
        "visibility": model.fringe_visibility(rho_e),
        "visibility_numeric": model.fringe_visibility_numeric(rho_e, g),
        "electron_state": _matrix_json(rho_e.mat),
    }
    _dump(sidecar, out / "pattern.json")
    return sidecar


def sweep_point(base: model.EraserParams, gamma: float, h2: float) -> dict:
    p = model.EraserParams(base.a, base.b, math.sqrt(h2), math.sqrt(1.0 - h2), gamma, base.theta)
    rho = model.build_joint_state(p)
    direct = model.fringe_visibility(model.electron_state(rho))
    rho_c, _ = model.condition_on_photon(rho, model.photon_projector("x", 1))
    report = ent.entanglement_report(rho)
    return {"gamma": gamma, "h2": h2, "direct_visibility": direct,
            "conditioned_visibility": model.fringe_visibility(rho_c), **report.to_dict()}


def cmd_sweep(cfg: ExperimentConfig, out: Path, grid: dict) -> list[dict]:
    base = cfg.params()
    rows = [sweep_point(base, float(g), float(h2)) for g in grid["gamma"] for h2 in grid["h2"]]
    cols = ["gamma", "h2", "direct_visibility", "conditioned_visibility", "concurrence",
            "negativity", "bell_fidelity", "witness_expectation", "eraser_lhs"]
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(row[c])) for c in cols) + "\n")
    for name in ("direct_visibility", "conditioned_visibility", "concurrence"):
        with open(out / f"{name}.csv", "w", encoding="utf-8") as fh:
            fh.write(f"gamma,h2,{name}\n")
            for row in rows:
                fh.write(f"{row['gamma']!r},{row['h2']!r},{float(row[name])!r}\n")
    return rows


def cmd_report(cfg: ExperimentConfig, out: Path) -> dict:
    rho = model.build_joint_state(cfg.params())
    report = ent.entanglement_report(rho).to_dict()
    _dump(report, out / "report.json")
    return report


def cmd_simulate(cfg: ExperimentConfig, out: Path, seed=None, settings=None) -> Path:
    run = cfg.run_config(seed=seed, settings=settings)
    stream = simulate_events(run)
    path = out / "events.ndjson"
    stream.write_ndjson(path)
    return path


def cmd_analyze(events: Path, out: Path, window_ps=None, n_bins: int = 120) -> dict:
    stream = EventStream.read_ndjson(events)
    try:
        run = RunConfig.from_dict(stream.config)
    except (KeyError, TypeError, ValueError) as exc:
        raise EventFormatError(f"event header has an unusable config echo: {exc}") from None
    window = run.coincidence_window_ps if window_ps is None else window_ps
    match = match_coincidences(stream, window)
    _dump({"config": stream.config}, out / "header_config.json")
    _dump(match.summary(), out / "matching.json")

    g = run.geometry
    bins = grid_bins(g, n_bins)
    hist_dir = out / "histograms"
    hist_dir.mkdir(exist_ok=True)
    fits = {}
    for label in stream.settings:
        for det, name in enumerate(DETECTORS):
            hist = histogram_conditioned(match, bins, label, det)
            hist.to_csv(hist_dir / f"{label}_{name}.csv")
            if label[0] != "z" and hist.total > 0:
                try:
                    fit = fit_fringes(hist, g)
                except DegenerateFitError:
                    continue
                fits[f"{label}_{name}"] = {"events": fit.n_events, "visibility": fit.visibility,
                                           "visibility_err": fit.visibility_err,
                                           "sx": fit.sx, "sy": fit.sy}
    _dump(fits, out / "fits.json")

    k = estimate_correlators(match, g, bins)
    _dump(k.to_dict(), out / "correlators.json")
    recon = ent.reconstruct_state(k)
    _dump({"state": _matrix_json(recon.state.mat), "raw": _matrix_json(recon.raw),
           "adjustment": recon.adjustment}, out / "reconstruction.json")
    report = ent.entanglement_report(recon.state).to_dict()
    _dump(report, out / "report.json")
    analytic = ent.entanglement_report(model.build_joint_state(run.params)).to_dict()
    summary = {"seed": run.seed, "config": stream.config, "matching": match.summary(),
               "report": report, "analytic_report": analytic}
    _dump(summary, out / "analysis.json")
    return summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qeraser", description="Free-electron quantum eraser toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", type=Path, default=None, help="flat key = value configuration file")
        p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("pattern", help="screen intensity pattern as CSV")
    common(p)
    p.add_argument("--condition", choices=CONDITIONS, default="none",
                   help="photon outcome to condition on (axis and sign, or wave plate port)")
    p = sub.add_parser("sweep", help="visibility/concurrence surfaces over gamma x |h|^2")
    common(p)
    p.add_argument("--grid", default="gamma=0:1:21,h2=0:1:21")
    p = sub.add_parser("report", help="entanglement report for the configured state")
    common(p)
    p = sub.add_parser("simulate", help="Monte Carlo event stream (NDJSON)")
    common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--setting", action="append", default=None,
                   help="measurement setting label such as zz or xx (repeatable)")
    p = sub.add_parser("analyze", help="coincidence analysis and tomography of an event file")
    p.add_argument("events", type=Path)
    common(p, config=False)
    p.add_argument("--window-ps", type=int, default=None)
    p.add_argument("--bins", type=int, default=120)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out: Path = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "analyze":
            result = cmd_analyze(args.events, out, args.window_ps, args.bins)
            print(json.dumps(result["report"], sort_keys=True))
        else:
            cfg = ExperimentConfig.load(args.config)
            _dump(cfg.echo(), out / "config.json")
            if args.command == "pattern":
                result = cmd_pattern(cfg, out, args.condition)
                print(json.dumps({"visibility": result["visibility"], "probability": result["probability"]}))
            elif args.command == "sweep":
                cmd_sweep(cfg, out, parse_grid(args.grid))
            elif args.command == "report":
                print(json.dumps(cmd_report(cfg, out), sort_keys=True))
            elif args.command == "simulate":
                cmd_simulate(cfg, out, args.seed, args.setting)
        _write_manifest(out)
    except (ConfigError, model.ZeroProbabilityBranch) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EventFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (MissingSettingsError, DegenerateFitError) as exc:
        print(f"statistics error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
