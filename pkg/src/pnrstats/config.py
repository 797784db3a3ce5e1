"""Experiment configuration: JSON file <-> dataclasses.

Sections: ``source``, ``detector1``, ``detector2``, ``splitter``, ``run``,
``sweep``, ``stability``, ``material``. Every section is optional and falls
back to defaults, but unknown sections or keys are rejected so that a typo
cannot silently leave a parameter at its default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from .detector import DetectorConfig, SplitterConfig
from .errors import ConfigError, InvalidSpec, ShotIOError
from .sources import MaterialParams, PumpStabilityModel, SourceSpec

SWEEP_PARAMETERS = ("pump_energy", "mean_photons", "nd_transmittance")
CALIBRATION_MODES = ("auto", "nominal")

DEFAULT_SHOTS = 100_000
DEFAULT_SEED = 12345
DEFAULT_RESAMPLES = 1000


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigError("sweep.values must be non-empty")
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("sweep.values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSpec = field(default_factory=SourceSpec)
    detector1: DetectorConfig = field(default_factory=DetectorConfig)
    detector2: DetectorConfig = field(default_factory=DetectorConfig)
    splitter: SplitterConfig = field(default_factory=SplitterConfig)
    shots: int = DEFAULT_SHOTS
    seed: int = DEFAULT_SEED
    resamples: int = DEFAULT_RESAMPLES
    workers: int = 1
    bin_count: int = 1000
    calibration: str = "auto"
    stability: Optional[PumpStabilityModel] = None
    sweep: Optional[SweepSpec] = None
    material: MaterialParams = field(default_factory=MaterialParams)

    def __post_init__(self):
        for name, lo in (("shots", 1), ("seed", 0), ("resamples", 100), ("workers", 1), ("bin_count", 10)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ConfigError(f"run.{name} must be an integer >= {lo}, got {v!r}")
        if self.calibration not in CALIBRATION_MODES:
            raise ConfigError(f"run.calibration must be one of {CALIBRATION_MODES}")

    def with_run(self, **overrides) -> "ExperimentConfig":
        """Copy with run-section overrides; ``None`` values are ignored."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        """Resolved configuration. ``workers`` is left out: it cannot change results."""
        d = {
            "source": _plain(self.source),
            "detector1": _plain(self.detector1),
            "detector2": _plain(self.detector2),
            "splitter": _plain(self.splitter),
            "run": {
                "shots": self.shots,
                "seed": self.seed,
                "resamples": self.resamples,
                "bin_count": self.bin_count,
                "calibration": self.calibration,
            },
            "material": _plain(self.material),
        }
        if self.stability is not None:
            d["stability"] = {"table": [list(row) for row in self.stability.table]}
        if self.sweep is not None:
            d["sweep"] = {"parameter": self.sweep.parameter, "values": list(self.sweep.values)}
        return d


def _plain(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


def _section(raw: dict, name: str, allowed) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")
    return sec


def _build(cls, raw: dict, name: str):
    allowed = [f.name for f in fields(cls)]
    sec = _section(raw, name, allowed)
    for key, value in sec.items():
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"{name}.{key} has unsupported value {value!r}")
    try:
        return cls(**sec)
    except (InvalidSpec, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name!r} section: {exc}") from exc


def config_from_dict(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    known = ("source", "detector1", "detector2", "splitter", "run", "sweep", "stability", "material")
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}; allowed: {', '.join(known)}")

    run = _section(raw, "run", ("shots", "seed", "resamples", "workers", "bin_count", "calibration"))

    stability = None
    if "stability" in raw:
        sec = _section(raw, "stability", ("table",))
        table = sec.get("table")
        try:
            stability = PumpStabilityModel(tuple((float(e), float(v)) for e, v in table))
        except (InvalidSpec, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid 'stability' section: {exc}") from exc

    sweep = None
    if "sweep" in raw:
        sec = _section(raw, "sweep", ("parameter", "values"))
        if not isinstance(sec.get("values"), list):
            raise ConfigError("sweep.values must be a list of numbers")
        try:
            sweep = SweepSpec(sec.get("parameter"), tuple(sec["values"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid 'sweep' section: {exc}") from exc

    try:
        return ExperimentConfig(
            source=_build(SourceSpec, raw, "source"),
            detector1=_build(DetectorConfig, raw, "detector1"),
            detector2=_build(DetectorConfig, raw, "detector2"),
            splitter=_build(SplitterConfig, raw, "splitter"),
            stability=stability,
            sweep=sweep,
            material=_build(MaterialParams, raw, "material"),
            **run,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ShotIOError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(raw)
