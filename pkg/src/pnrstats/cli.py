"""Command line interface.

Subcommands::

    simulate        config -> per-shot CSVs + reconstruction report
    analyze         count CSV (single or paired) -> statistics report
    reconstruct     pulse-height CSV -> calibration + photon-number pmf
    sweep           config with a 'sweep' section -> sweep CSV + JSON
    critical-power  material parameters -> self-focusing power and pulse energy

Values given on the command line override the config file, which overrides
built-in defaults.

Exit status: 0 success, 2 configuration error, 3 I/O error,
4 numeric/estimator error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ExperimentConfig, load_config
from .detector import AnalogShotSeries
from .errors import ConfigError, PnrStatsError, ShotIOError
from .experiments import (
    build_report,
    dumps_report,
    poisson_fidelity,
    reconstruct_series,
    run_reconstruction,
    run_sweep,
)
from .phs import PhsCalibration, build_histogram
from .rng import derive_seed
from .shotio import read_shots, write_histogram, write_shots
from .sources import MaterialParams, critical_energy, critical_power
from .stats import PairedShotSeries, empirical_distribution, summarize

ROUNDING_NOTE = ("critical energy = critical power x pulse duration; "
                 "the ~0.3 uJ figure often quoted for these constants is this value rounded to one significant figure")


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    p.add_argument("--shots", type=int, help="number of laser shots (overrides run.shots)")
    p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="format of the printed/main output (default: json)")
    p.add_argument("--workers", type=int, help="worker threads; results do not depend on it")
    p.add_argument("--resamples", type=int, help="bootstrap resamples (overrides run.resamples)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pnrstats", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="simulate the detection chain and reconstruct arm 1")
    _common(s)

    a = sub.add_parser("analyze", help="statistics of a count CSV")
    a.add_argument("input", type=Path)
    _common(a)

    r = sub.add_parser("reconstruct", help="photon numbers from a pulse-height CSV")
    r.add_argument("input", type=Path)
    r.add_argument("--bin-count", type=int, help="histogram bins (overrides run.bin_count)")
    r.add_argument("--pedestal", type=float,
                   help="known zero-photon pulse height; extends the peak grid down to it")
    r.add_argument("--calibration", type=Path,
                   help="JSON file with a 'calibration' section to apply instead of calibrating")
    _common(r)

    w = sub.add_parser("sweep", help="pump-energy or mean-photon sweep")
    _common(w)

    c = sub.add_parser("critical-power", help="Marburger critical power and pulse energy")
    c.add_argument("--config", type=Path, help="JSON configuration file ('material' section)")
    c.add_argument("--wavelength", type=float, help="vacuum wavelength [m]")
    c.add_argument("--n0", type=float, help="linear refractive index")
    c.add_argument("--n2", type=float, help="nonlinear index [m^2/W]")
    c.add_argument("--tau", type=float, help="pulse duration [s]")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    try:
        return cfg.with_run(seed=args.seed, shots=args.shots, workers=args.workers,
                            resamples=args.resamples,
                            bin_count=getattr(args, "bin_count", None))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(args, text: str, filename: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    _write(args.out / filename, text)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ShotIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _dist_csv(dist) -> str:
    rows = ["m,probability,uncertainty"]
    rows += [f"{m},{p:.17g},{u:.17g}" for m, (p, u) in enumerate(zip(dist.probs, dist.uncertainties))]
    return "\n".join(rows) + "\n"


def cmd_simulate(args) -> None:
    cfg = resolve_config(args)
    result = run_reconstruction(cfg)
    report = dumps_report(result.report())
    if args.out is not None:
        _mkdir(args.out)
        write_shots(result.run.photons, args.out / "photons.csv")
        write_shots(result.run.fired, args.out / "detected.csv")
        write_shots(result.analog, args.out / "analog_arm1.csv")
        _write(args.out / "report.json", report)
        if args.format == "csv":
            _write(args.out / "distribution.csv", _dist_csv(result.distribution))
    else:
        sys.stdout.write(report if args.format == "json" else _dist_csv(result.distribution))


def _mkdir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ShotIOError(f"cannot create {path}: {exc.strerror or exc}") from exc


def _echo(args, cfg: ExperimentConfig, **extra) -> dict:
    d = {"input": str(args.input), "seed": cfg.seed, "resamples": cfg.resamples}
    d.update(extra)
    return d


def cmd_analyze(args) -> None:
    cfg = resolve_config(args)
    series = read_shots(args.input)
    boot = derive_seed(cfg.seed, "bootstrap")
    if isinstance(series, AnalogShotSeries):
        raise ConfigError(f"{args.input} holds pulse heights; use 'reconstruct'")
    if isinstance(series, PairedShotSeries):
        stats = {
            "arm1": summarize(series.arm1, cfg.resamples, boot, partner=series.arm2),
            "arm2": summarize(series.arm2, cfg.resamples, derive_seed(boot, 2), partner=series.arm1),
        }
        primary = series.arm1
    else:
        stats = {"arm1": summarize(series, cfg.resamples, boot)}
        primary = series
    dist = empirical_distribution(primary)
    report = build_report(None, stats=stats, distribution=dist, fidelity=poisson_fidelity(primary))
    report["config"] = _echo(args, cfg)
    report["stats"]["resamples"] = cfg.resamples
    if args.format == "csv":
        _emit(args, _dist_csv(dist), "distribution.csv")
    else:
        _emit(args, dumps_report(report), "report.json")


def _load_calibration(path: Path) -> PhsCalibration:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ShotIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    sec = raw.get("calibration", raw) if isinstance(raw, dict) else None
    try:
        return PhsCalibration(float(sec["offset"]), float(sec["peak_spacing"]),
                              tuple(sec["thresholds"]), tuple(sec.get("peaks", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: not a calibration: {exc}") from exc


def cmd_reconstruct(args) -> None:
    cfg = resolve_config(args)
    analog = read_shots(args.input)
    if not isinstance(analog, AnalogShotSeries):
        raise ConfigError(f"{args.input} holds integer counts; use 'analyze'")
    preset = _load_calibration(args.calibration) if args.calibration else None
    cal, counts = reconstruct_series(analog, cfg.bin_count, preset, pedestal=args.pedestal)
    dist = empirical_distribution(counts)
    stats = summarize(counts, cfg.resamples, derive_seed(cfg.seed, "bootstrap"))
    report = build_report(None, stats=stats, distribution=dist, fidelity=poisson_fidelity(counts),
                          calibration=cal)
    report["config"] = _echo(args, cfg, bin_count=cfg.bin_count, pedestal=args.pedestal,
                             calibration=str(args.calibration) if args.calibration else "auto")
    report["stats"]["resamples"] = cfg.resamples
    if args.out is not None and preset is None:
        _mkdir(args.out)
        write_histogram(build_histogram(analog, cfg.bin_count), args.out / "histogram.csv")
    if args.format == "csv":
        _emit(args, _dist_csv(dist), "distribution.csv")
    else:
        _emit(args, dumps_report(report), "report.json")


def cmd_sweep(args) -> None:
    cfg = resolve_config(args)
    result = run_sweep(cfg)
    report = dumps_report(build_report(cfg, sweep=result))
    if args.out is not None:
        _write(args.out / "sweep.csv", result.to_csv())
        _write(args.out / "report.json", report)
    else:
        sys.stdout.write(report if args.format == "json" else result.to_csv())


def critical_power_report(params: MaterialParams) -> dict:
    p, e = critical_power(params), critical_energy(params)
    return {
        "material": {k: getattr(params, k) for k in params.__dataclass_fields__},
        "critical_power_W": p,
        "critical_energy_J": e,
        "critical_energy_uJ": e * 1e6,
        "note": ROUNDING_NOTE,
    }


def cmd_critical_power(args) -> None:
    base = load_config(args.config).material if args.config else MaterialParams()
    overrides = {k: v for k, v in (("wavelength_m", args.wavelength), ("linear_index", args.n0),
                                   ("nonlinear_index_m2_per_W", args.n2),
                                   ("pulse_duration_s", args.tau)) if v is not None}
    try:
        params = replace(base, **overrides)
    except PnrStatsError as exc:
        raise ConfigError(str(exc)) from exc
    rep = critical_power_report(params)
    if args.format == "csv":
        sys.stdout.write("critical_power_W,critical_energy_J\n"
                         f"{rep['critical_power_W']:.17g},{rep['critical_energy_J']:.17g}\n")
    else:
        sys.stdout.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "critical-power": cmd_critical_power,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.cmd](args)
    except PnrStatsError as exc:
        print(f"pnrstats: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pnrstats: I/O error: {exc}", file=sys.stderr)
        return ShotIOError.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
