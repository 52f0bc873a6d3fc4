"""Command-line front end.

Subcommands: simulate | fit | psd | filter | estimate-rates | report.
Every command prints exactly one JSON document (keys sorted) to stdout;
logs and error reports go to stderr. Exit codes: 0 success, 2
configuration or parse error, 3 numerical failure. Outputs embed the
seed, the tool version, and SHA-256 digests of every input file read.
Values from a config file are defaults; command-line flags override
them. The default output directory is taken from the TRAPCOH_OUTDIR
environment variable when set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, report
from .coherence import (CoherenceSeries, DecayParams, analytic_series,
                        gaussian_channel_mc, t2_time)
from .errors import ConfigError, DomainError, TrapcohError
from .fitting import (fit_coherence_decay, fit_exponential, fit_fringe,
                      fit_ramsey_decay)
from .noise import NoiseSpectrum, TimeSeries, estimate_psd, relative_variance
from .phonon import (TrapNoise, classical_thermal_rate, first_jump_survival_mc,
                     thermal_average_pjr, total_jump_rate)
from .sequences import (PulseSequence, cpmg, filtered_sigma, ramsey,
                        sample_filter, spin_echo)
from .trap import (FixedOccupation, ThermalOccupation, TrapConfig, dls_sigma,
                   thermal_average_dls_sigma)

log = logging.getLogger("trapcoh")

FIT_MODELS = ("coherence", "fringe", "exponential", "ramsey")


def _sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _sha256_preset(name) -> str:
    data = resources.files("trapcoh.data").joinpath(f"{name}.json").read_bytes()
    return hashlib.sha256(data).hexdigest()


def _load_config(value, inputs):
    """Trap config from a file path or a bundled preset name."""
    if os.path.exists(value):
        inputs[str(value)] = _sha256_file(value)
        return TrapConfig.load(value)
    cfg = TrapConfig.load_preset(value)
    inputs[f"preset:{value}"] = _sha256_preset(value)
    return cfg


def _load_spectrum(value, inputs):
    if os.path.exists(value):
        inputs[str(value)] = _sha256_file(value)
        return NoiseSpectrum.load(value)
    spec = NoiseSpectrum.load_preset(value)
    inputs[f"preset:{value}"] = _sha256_preset(value)
    return spec


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get("TRAPCOH_OUTDIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(inputs, seed=None):
    return {"seed": seed, "version": __version__, "inputs": inputs}


def _emit(doc) -> int:
    json.dump(doc, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")
    return 0


def _parse_occupation(text) -> FixedOccupation:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("occupation must be three comma-separated integers",
                          kind="parse_error")
    try:
        nx, ny, nz = (int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad occupation {text!r}: {exc}", kind="parse_error") from exc
    return FixedOccupation(nx, ny, nz)


def _trap_noise(args, inputs) -> TrapNoise:
    spring = _load_spectrum(args.spring_psd, inputs) if args.spring_psd else None
    position = _load_spectrum(args.position_psd, inputs) if args.position_psd else None
    return TrapNoise.uniform(spring=spring, position=position)


def cmd_simulate(args) -> int:
    inputs = {}
    out = _outdir(args)
    cfg = _load_config(args.config, inputs)
    noise = _trap_noise(args, inputs)

    if args.temperature is not None:
        dist = ThermalOccupation.from_temperature(args.temperature, cfg)
        sigma = thermal_average_dls_sigma(cfg, dist)
        pjr = thermal_average_pjr(cfg, noise, dist)
    else:
        occ = _parse_occupation(args.occupation)
        sigma = abs(dls_sigma(cfg, occ))
        pjr = total_jump_rate(cfg, noise, occ).total
    if args.sigma_dls is not None:
        sigma = args.sigma_dls
    if args.pjr is not None:
        pjr = args.pjr
    params = DecayParams(sigma, pjr)
    log.info("simulating with sigma_dls=%g rad/s, pjr=%g 1/s", sigma, pjr)

    grid = np.linspace(0.0, args.t_max, args.points)
    analytic = analytic_series(params, grid)
    analytic_path = out / "analytic.csv"
    analytic.to_csv(analytic_path)

    mc_gauss = gaussian_channel_mc(sigma, args.n_traj, args.seed, grid)
    surv = first_jump_survival_mc(pjr, args.n_traj, args.seed + 1, grid)
    surv_err = np.sqrt(surv * (1.0 - surv) / args.n_traj)
    combined = mc_gauss.coherence * surv
    combined_err = np.sqrt((mc_gauss.sigma * surv) ** 2
                           + (mc_gauss.coherence * surv_err) ** 2)
    mc_series = CoherenceSeries(grid, combined, combined_err)
    mc_path = out / "montecarlo.csv"
    mc_series.to_csv(mc_path)

    params_path = out / "params.json"
    with open(params_path, "w") as fh:
        json.dump(params.to_json_obj(), fh, sort_keys=True, indent=1)
        fh.write("\n")

    doc = {
        "command": "simulate",
        "params": params.to_json_obj(),
        "t2_s": t2_time(params) if (sigma, pjr) != (0.0, 0.0) else None,
        "n_traj": args.n_traj,
        "files": {"analytic": str(analytic_path), "montecarlo": str(mc_path),
                  "params": str(params_path)},
        "meta": _meta(inputs, args.seed),
    }
    return _emit(doc)


def _read_columns(path, required):
    """CSV columns by header name; returns dict of float arrays."""
    try:
        with open(path) as fh:
            header = [h.strip() for h in fh.readline().strip().split(",")]
            rows = [line.strip().split(",") for line in fh if line.strip()]
    except FileNotFoundError as exc:
        raise ConfigError(f"data file not found: {path}", kind="config_not_found") from exc
    missing = [c for c in required if c not in header]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing}, header {header}",
                          kind="parse_error")
    try:
        cols = {name: np.array([float(r[header.index(name)]) for r in rows])
                for name in header}
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: {exc}", kind="parse_error") from exc
    return cols


def _write_residuals(path, x_name, x, observed, modeled):
    with open(path, "w") as fh:
        fh.write(f"{x_name},observed,model,residual\n")
        for xi, oi, mi in zip(x, observed, modeled):
            fh.write(f"{float(xi)!r},{float(oi)!r},{float(mi)!r},{float(oi - mi)!r}\n")


def cmd_fit(args) -> int:
    inputs = {str(args.data): _sha256_file(args.data)} if os.path.exists(args.data) \
        else {}
    out = _outdir(args)

    if args.model in ("coherence", "ramsey"):
        series = CoherenceSeries.from_csv(args.data)
        decay = fit_coherence_decay(series)
        if args.model == "ramsey":
            eta = args.eta
            if eta is None and args.config is not None:
                eta = _load_config(args.config, inputs).eta
            if eta is None:
                raise ConfigError("ramsey fit needs --eta or --config",
                                  kind="parse_error")
            result = fit_ramsey_decay(series, eta)
        else:
            result = decay
        x_name, x, y = "t_s", series.t_s, series.coherence
        p = DecayParams(decay.params["sigma_dls_rad_s"], decay.params["pjr_per_s"])
        modeled = np.exp(-0.5 * (p.sigma_dls * x) ** 2 - p.pjr * x)
    elif args.model == "fringe":
        cols = _read_columns(args.data, ["phase_rad", "population"])
        sigma = cols.get("sigma")
        result = fit_fringe(cols["phase_rad"], cols["population"], sigma)
        x_name, x, y = "phase_rad", cols["phase_rad"], cols["population"]
        modeled = (result.params["baseline"] + 0.5 * result.params["amplitude"]
                   * np.cos(x - result.params["phase_rad"]))
    else:
        cols = _read_columns(args.data, ["t_s", "survival"])
        result = fit_exponential(cols["t_s"], cols["survival"], cols.get("sigma"))
        x_name, x, y = "t_s", cols["t_s"], cols["survival"]
        modeled = (result.params["amplitude"]
                   * np.exp(-x / result.params["lifetime_s"]))

    residuals_path = out / "residuals.csv"
    _write_residuals(residuals_path, x_name, x, y, modeled)
    log.info("fit rss=%g, wrote %s", result.rss, residuals_path)

    doc = result.to_json_obj()
    doc["meta"] = _meta(inputs)
    doc["files"] = {"residuals": str(residuals_path)}
    return _emit(doc)


def cmd_psd(args) -> int:
    inputs = {str(args.data): _sha256_file(args.data)} if os.path.exists(args.data) \
        else {}
    out = _outdir(args)
    series = TimeSeries.from_csv(args.data)
    spectrum = estimate_psd(series, args.segment_length, args.overlap, kind=args.kind)
    csv_path = out / "psd.csv"
    json_path = out / "psd.json"
    spectrum.to_csv(csv_path)
    spectrum.save(json_path)
    integral = float(np.trapezoid(spectrum.psd, spectrum.frequencies_hz))
    doc = {
        "command": "psd",
        "kind": spectrum.kind,
        "relative_variance": relative_variance(series),
        "psd_integral": integral,
        "n_samples": len(series.samples),
        "sample_rate_hz": series.sample_rate_hz,
        "files": {"psd_csv": str(csv_path), "psd_json": str(json_path)},
        "meta": _meta(inputs),
    }
    return _emit(doc)


def _build_sequence(args, inputs) -> PulseSequence:
    chosen = [name for name, val in [("--ramsey", args.ramsey), ("--echo", args.echo),
                                     ("--cpmg", args.cpmg), ("--sequence", args.sequence)]
              if val is not None]
    if len(chosen) != 1:
        raise ConfigError("give exactly one of --ramsey, --echo, --cpmg, --sequence",
                          kind="parse_error")
    if args.ramsey is not None:
        return ramsey(args.ramsey)
    if args.echo is not None:
        return spin_echo(args.echo)
    if args.cpmg is not None:
        if args.interval is None:
            raise ConfigError("--cpmg needs --interval", kind="parse_error")
        return cpmg(args.cpmg, args.interval)
    inputs[str(args.sequence)] = _sha256_file(args.sequence)
    return PulseSequence.load(args.sequence)


def cmd_filter(args) -> int:
    inputs = {}
    out = _outdir(args)
    seq = _build_sequence(args, inputs)
    freqs = np.logspace(np.log10(args.f_min), np.log10(args.f_max), args.points)
    curve = sample_filter(seq, freqs)
    csv_path = out / "filter.csv"
    curve.to_csv(csv_path)
    sigma_eff = None
    if args.dls_psd is not None:
        psd = _load_spectrum(args.dls_psd, inputs)
        sigma_eff = filtered_sigma(seq, psd, band=(args.f_min, args.f_max))
    doc = {
        "command": "filter",
        "t_total_s": seq.t_total_s,
        "n_pulses": seq.n_pulses,
        "sigma_eff_rad_s": sigma_eff,
        "files": {"filter": str(csv_path)},
        "meta": _meta(inputs),
    }
    return _emit(doc)


def cmd_estimate_rates(args) -> int:
    inputs = {}
    cfg = _load_config(args.config, inputs)
    noise = _trap_noise(args, inputs)
    if args.occupation is None and args.temperature is None:
        raise ConfigError("give --occupation and/or --temperature", kind="parse_error")

    doc = {
        "command": "estimate-rates",
        "psd_convention": "S(omega) = S(f) / (2 pi), applied once at evaluation",
        "fixed": None,
        "thermal": None,
        "meta": _meta(inputs),
    }
    if args.occupation is not None:
        occ = _parse_occupation(args.occupation)
        rates = total_jump_rate(cfg, noise, occ)
        doc["fixed"] = {
            "occupation": [int(n) for n in occ.numbers],
            "rate_x_per_s": rates.x, "rate_y_per_s": rates.y,
            "rate_z_per_s": rates.z, "total_per_s": rates.total,
        }
    if args.temperature is not None:
        dist = ThermalOccupation.from_temperature(args.temperature, cfg)
        doc["thermal"] = {
            "temperature_k": args.temperature,
            "nbar": list(dist.means),
            "classical_per_s": classical_thermal_rate(cfg, noise, args.temperature),
            "exact_average_per_s": thermal_average_pjr(cfg, noise, dist),
        }
    return _emit(doc)


def cmd_report(args) -> int:
    out = _outdir(args)
    rows = report.build_report(mc_seed=args.seed)
    doc = report.to_json_obj(rows)
    doc["meta"] = _meta({}, args.seed)
    md_path = out / "report.md"
    md_path.write_text(report.to_markdown(rows))
    json_path = out / "report.json"
    with open(json_path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    doc["files"] = {"markdown": str(md_path), "json": str(json_path)}
    _emit(doc)
    if not report.all_passed(rows):
        log.error("report has failing rows")
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapcoh",
        description="Coherence model of an optically trapped single-atom qubit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="analytic + Monte-Carlo decay curves")
    sim.add_argument("--config", default="cs133",
                     help="trap config: preset name or JSON path")
    sim.add_argument("--spring-psd", help="fractional spring-constant PSD (preset or path)")
    sim.add_argument("--position-psd", help="trap position PSD (preset or path)")
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--occupation", default="0,0,0", help="phonon numbers nx,ny,nz")
    group.add_argument("--temperature", type=float,
                       help="thermal occupation at this temperature (K)")
    sim.add_argument("--sigma-dls", type=float, help="override the Gaussian width (rad/s)")
    sim.add_argument("--pjr", type=float, help="override the jump rate (1/s)")
    sim.add_argument("--t-max", type=float, default=0.4, help="grid end time (s)")
    sim.add_argument("--points", type=int, default=81, help="grid size")
    sim.add_argument("--n-traj", type=int, default=10000, help="Monte-Carlo trajectories")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--outdir")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="least-squares parameter extraction")
    fit.add_argument("--data", required=True, help="input CSV")
    fit.add_argument("--model", required=True, choices=FIT_MODELS)
    fit.add_argument("--eta", type=float, help="shift ratio for the ramsey model")
    fit.add_argument("--config", help="trap config supplying eta for the ramsey model")
    fit.add_argument("--outdir")
    fit.set_defaults(func=cmd_fit)

    psd = sub.add_parser("psd", help="Welch PSD of a power time series")
    psd.add_argument("--data", required=True, help="time series CSV (t_s,power_w)")
    psd.add_argument("--segment-length", type=int, default=4096)
    psd.add_argument("--overlap", type=float, default=0.5)
    psd.add_argument("--kind", default="spring_fractional",
                     choices=("spring_fractional", "position"))
    psd.add_argument("--outdir")
    psd.set_defaults(func=cmd_psd)

    filt = sub.add_parser("filter", help="sequence filter function, optional sigma_eff")
    filt.add_argument("--ramsey", type=float, metavar="T_TOTAL",
                      help="free precession of this length (s)")
    filt.add_argument("--echo", type=float, metavar="T_TOTAL",
                      help="single refocusing pulse, total time (s)")
    filt.add_argument("--cpmg", type=int, metavar="N", help="N-pulse train")
    filt.add_argument("--interval", type=float, help="pulse interval for --cpmg (s)")
    filt.add_argument("--sequence", help="pulse sequence JSON path")
    filt.add_argument("--f-min", type=float, default=1e-4)
    filt.add_argument("--f-max", type=float, default=1e3)
    filt.add_argument("--points", type=int, default=2000)
    filt.add_argument("--dls-psd", help="DLS noise PSD (preset or path) for sigma_eff")
    filt.add_argument("--outdir")
    filt.set_defaults(func=cmd_filter)

    est = sub.add_parser("estimate-rates", help="phonon jump rates from noise spectra")
    est.add_argument("--config", default="cs133")
    est.add_argument("--spring-psd")
    est.add_argument("--position-psd")
    est.add_argument("--occupation", help="fixed phonon numbers nx,ny,nz")
    est.add_argument("--temperature", type=float, help="thermal distribution (K)")
    est.set_defaults(func=cmd_estimate_rates)

    rep = sub.add_parser("report", help="recompute the reproduction table")
    rep.add_argument("--seed", type=int, default=11)
    rep.add_argument("--outdir")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        json.dump({"error": {"kind": exc.kind, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except DomainError as exc:
        json.dump({"error": {"kind": exc.kind, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except TrapcohError as exc:
        json.dump({"error": {"kind": exc.kind, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
