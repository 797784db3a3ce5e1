"""Measurement campaigns: distribution reconstruction, pump-energy sweep and
mean-photon sweep.

Every sweep point reuses the same random seeds (common random numbers), so
points that differ only in an irrelevant parameter give identical rows and
neighbouring points differ mostly by the swept effect.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import Optional

from .config import ExperimentConfig
from .detector import (
    AnalogShotSeries,
    DetectorConfig,
    SplitterConfig,
    attenuate,
    detect,
    split_beam,
    synthesize_pulse_heights,
)
from .errors import ConfigError
from .phs import PhsCalibration, build_histogram, calibrate, nominal_calibration, quantize
from .rng import derive_seed
from .sources import SourceSpec, draw_shots, stability_lookup
from .stats import (
    PairedShotSeries,
    PhotonNumberDistribution,
    ShotSeries,
    StatsReport,
    bootstrap_uncertainty,
    empirical_distribution,
    fidelity,
    g11_cross,
    g2_detected,
    mean,
    poisson_cutoff,
    poisson_pmf,
    summarize,
)

ERROR_BARS = "bootstrap standard error (1 sigma)"


@dataclass(frozen=True, eq=False)
class SimulatedRun:
    photons: ShotSeries
    fired: PairedShotSeries


def simulate_arms(config: ExperimentConfig, source: Optional[SourceSpec] = None,
                  nd_transmittance: Optional[float] = None) -> SimulatedRun:
    """Source -> optional neutral density filter -> splitter -> two detectors."""
    seed, workers = config.seed, config.workers
    photons = draw_shots(source or config.source, config.shots, derive_seed(seed, "source"), workers)
    if nd_transmittance is not None:
        if not 0 <= nd_transmittance <= 1:
            raise ConfigError(f"nd_transmittance must lie in [0, 1], got {nd_transmittance!r}")
        photons = attenuate(photons, nd_transmittance, derive_seed(seed, "nd-filter"), workers)
    pair = split_beam(photons, config.splitter, derive_seed(seed, "splitter"), workers)
    arm1 = detect(pair.arm1, config.detector1, derive_seed(seed, "detector1"), workers)
    arm2 = detect(pair.arm2, config.detector2, derive_seed(seed, "detector2"), workers)
    return SimulatedRun(photons, PairedShotSeries(arm1, arm2))


def poisson_fidelity(series: ShotSeries) -> float:
    """Fidelity of the empirical pmf to a Poisson pmf with the same mean."""
    dist = empirical_distribution(series)
    mu = mean(series)
    model = poisson_pmf(mu, max(poisson_cutoff(mu), dist.max_count))
    return fidelity(dist, model)


# ---------------------------------------------------------------------------
# reconstruction

@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    distribution: PhotonNumberDistribution
    stats: StatsReport
    fidelity: float
    calibration: PhsCalibration
    reconstructed: ShotSeries
    analog: AnalogShotSeries
    run: SimulatedRun
    config: ExperimentConfig

    @property
    def truth(self) -> ShotSeries:
        """Fired-cell counts of arm 1 before pulse-height synthesis."""
        return self.run.fired.arm1

    def report(self) -> dict:
        return build_report(self.config, stats=self.stats, distribution=self.distribution,
                            fidelity=self.fidelity, calibration=self.calibration)


def reconstruct_series(analog: AnalogShotSeries, bin_count: int = 1000,
                       calibration: Optional[PhsCalibration] = None,
                       pedestal: Optional[float] = None):
    """Pulse heights -> (calibration, photon numbers). Calibrates from the data unless given one."""
    cal = calibration or calibrate(build_histogram(analog, bin_count), pedestal=pedestal)
    return cal, quantize(analog, cal)


def run_reconstruction(config: ExperimentConfig) -> ReconstructionResult:
    """Simulate arm 1, go through its pulse-height spectrum, and compare the
    reconstructed pmf with a Poisson pmf at the measured mean."""
    run = simulate_arms(config)
    truth = run.fired.arm1
    analog = synthesize_pulse_heights(truth, config.detector1,
                                      derive_seed(config.seed, "analog1"), config.workers)
    preset = nominal_calibration(config.detector1) if config.calibration == "nominal" else None
    # synthesized pulse heights have their zero-photon level at 0
    cal, counts = reconstruct_series(analog, config.bin_count, preset, pedestal=0.0)
    dist = empirical_distribution(counts)
    stats = summarize(counts, config.resamples, derive_seed(config.seed, "bootstrap"))
    return ReconstructionResult(dist, stats, poisson_fidelity(counts), cal, counts, analog, run, config)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepRow:
    parameter_value: float
    mean1: float
    mean2: float
    g2_1: float
    g2_1_err: float
    g2_2: float
    g2_2_err: float
    g11: float
    g11_err: float
    fidelity_to_poisson: float


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    rows: tuple[SweepRow, ...]

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "columns": list(SWEEP_COLUMNS),
            "rows": [[getattr(r, c) for c in SWEEP_COLUMNS] for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = [",".join(SWEEP_COLUMNS)]
        for r in self.rows:
            lines.append(",".join(f"{getattr(r, c):.17g}" for c in SWEEP_COLUMNS))
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]


def measure_point(config: ExperimentConfig, value: float, source: Optional[SourceSpec] = None,
                  nd_transmittance: Optional[float] = None) -> SweepRow:
    """One sweep row: g2 per arm, cross-correlation, Poisson fidelity of arm 1."""
    fired = simulate_arms(config, source, nd_transmittance).fired
    boot = derive_seed(config.seed, "bootstrap")
    r = config.resamples
    return SweepRow(
        parameter_value=float(value),
        mean1=mean(fired.arm1),
        mean2=mean(fired.arm2),
        g2_1=g2_detected(fired.arm1),
        g2_1_err=bootstrap_uncertainty(fired.arm1, "g2_detected", r, boot),
        g2_2=g2_detected(fired.arm2),
        g2_2_err=bootstrap_uncertainty(fired.arm2, "g2_detected", r, derive_seed(boot, 2)),
        g11=g11_cross(fired),
        g11_err=bootstrap_uncertainty(fired, "g11_cross", r, derive_seed(boot, 3)),
        fidelity_to_poisson=poisson_fidelity(fired.arm1),
    )


def _require_sweep(config: ExperimentConfig, allowed: tuple[str, ...]):
    if config.sweep is None or config.sweep.parameter not in allowed:
        raise ConfigError(f"this campaign needs a sweep over one of {allowed}")
    return config.sweep


def pump_source(config: ExperimentConfig, pulse_energy_J: float) -> SourceSpec:
    """Source at a given pump energy.

    The mean photon number stays at ``config.source.mean_photons``: the gain
    is unit-mean, so holding brightness constant (as a neutral density filter
    would) requires no rescaling in this model.
    """
    if config.stability is None:
        raise ConfigError("a pump-energy sweep needs a 'stability' table")
    if config.source.kind not in ("poisson", "compound_poisson"):
        raise ConfigError("a pump-energy sweep needs a poisson or compound_poisson source")
    var = stability_lookup(config.stability, pulse_energy_J)
    return SourceSpec("compound_poisson", config.source.mean_photons, var)


def run_power_sweep(config: ExperimentConfig) -> SweepResult:
    sweep = _require_sweep(config, ("pump_energy",))
    rows = tuple(measure_point(config, e, pump_source(config, e)) for e in sweep.values)
    return SweepResult(sweep.parameter, rows)


def source_mean_for_detected(target: float, detector: DetectorConfig, splitter: SplitterConfig) -> float:
    """Source mean that puts ``target`` detected counts in arm 1, ignoring saturation."""
    throughput = detector.efficiency * splitter.transmittance
    if throughput <= 0:
        raise ConfigError("arm 1 has zero throughput; cannot reach a detected mean")
    return max(0.0, (target * (1.0 - detector.crosstalk) - detector.dark_mean) / throughput)


def run_mean_sweep(config: ExperimentConfig) -> SweepResult:
    """Sweep the brightness at a stable pump.

    ``mean_photons`` values are target detected means in arm 1;
    ``nd_transmittance`` values attenuate the configured source.
    """
    sweep = _require_sweep(config, ("mean_photons", "nd_transmittance"))
    src = config.source
    if src.kind == "compound_poisson" and src.gain_variance > 0:
        raise ConfigError("a mean sweep assumes a stable pump (gain_variance = 0)")
    rows = []
    for v in sweep.values:
        if sweep.parameter == "mean_photons":
            mu = source_mean_for_detected(v, config.detector1, config.splitter)
            rows.append(measure_point(config, v, replace(src, mean_photons=mu)))
        else:
            rows.append(measure_point(config, v, nd_transmittance=v))
    return SweepResult(sweep.parameter, tuple(rows))


def run_sweep(config: ExperimentConfig) -> SweepResult:
    if config.sweep is None:
        raise ConfigError("configuration has no 'sweep' section")
    if config.sweep.parameter == "pump_energy":
        return run_power_sweep(config)
    return run_mean_sweep(config)


# ---------------------------------------------------------------------------
# reports

def distribution_dict(dist: PhotonNumberDistribution, fid: Optional[float] = None) -> dict:
    d = {
        "probs": dist.probs.tolist(),
        "uncertainties": dist.uncertainties.tolist(),
        "sample_count": dist.sample_count,
        "mean": dist.mean(),
    }
    if fid is not None:
        d["fidelity_to_poisson"] = fid
    return d


def build_report(config: Optional[ExperimentConfig] = None, *, stats=None,
                 distribution: Optional[PhotonNumberDistribution] = None, fidelity: Optional[float] = None,
                 calibration: Optional[PhsCalibration] = None, sweep: Optional[SweepResult] = None,
                 extra_stats: Optional[dict] = None) -> dict:
    """Assemble the JSON report sections ``config, stats, distribution, calibration, sweep``."""
    report = {"config": config.to_dict() if config is not None else None}
    if stats is not None or extra_stats:
        s = {}
        if isinstance(stats, StatsReport):
            s["arm1"] = stats.to_dict()
        elif isinstance(stats, dict):
            s.update({k: v.to_dict() for k, v in stats.items()})
        s.update(extra_stats or {})
        s["error_bars"] = ERROR_BARS
        if config is not None:
            s["resamples"] = config.resamples
        report["stats"] = s
    else:
        report["stats"] = None
    report["distribution"] = distribution_dict(distribution, fidelity) if distribution is not None else None
    report["calibration"] = calibration.to_dict() if calibration is not None else None
    report["sweep"] = sweep.to_dict() if sweep is not None else None
    return report


def dumps_report(report: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, NaN written as null."""
    return json.dumps(_nan_to_none(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _nan_to_none(obj):
    if isinstance(obj, float) and obj != obj:
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj
