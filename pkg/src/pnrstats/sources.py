"""Light source models and self-focusing diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidSpec, OutOfRange
from .rng import BLOCK_SIZE, map_blocks, substream
from .stats import ShotSeries

SOURCE_KINDS = ("poisson", "thermal", "compound_poisson", "constant")

# Marburger coefficient for a cylindrically symmetric Gaussian beam
MARBURGER_COEFF = 3.72


@dataclass(frozen=True)
class SourceSpec:
    """Per-shot photon-number law.

    ``gain_variance`` is the variance of the unit-mean gamma gain that
    multiplies the Poisson mean shot by shot; it only matters for
    ``compound_poisson``.
    """

    kind: str = "poisson"
    mean_photons: float = 1.0
    gain_variance: float = 0.0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise InvalidSpec(f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}")
        if not (math.isfinite(self.mean_photons) and self.mean_photons >= 0):
            raise InvalidSpec(f"mean_photons must be finite and >= 0, got {self.mean_photons!r}")
        if not (math.isfinite(self.gain_variance) and self.gain_variance >= 0):
            raise InvalidSpec(f"gain_variance must be finite and >= 0, got {self.gain_variance!r}")


@dataclass(frozen=True)
class MaterialParams:
    """Kerr medium: wavelength [m], linear index, n2 [m^2/W], pulse duration [s]."""

    wavelength_m: float = 1030e-9
    linear_index: float = 1.82
    nonlinear_index_m2_per_W: float = 6.13e-20
    pulse_duration_s: float = 190e-15

    def __post_init__(self):
        for name in ("wavelength_m", "nonlinear_index_m2_per_W", "pulse_duration_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidSpec(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.linear_index) and self.linear_index >= 1):
            raise InvalidSpec(f"linear_index must be >= 1, got {self.linear_index!r}")


@dataclass(frozen=True)
class PumpStabilityModel:
    """Piecewise-linear gain variance versus pump pulse energy [J]."""

    table: tuple[tuple[float, float], ...]

    def __post_init__(self):
        rows = tuple((float(e), float(v)) for e, v in self.table)
        if len(rows) < 1:
            raise InvalidSpec("stability table needs at least one entry")
        energies = [e for e, _ in rows]
        values = [v for _, v in rows]
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise InvalidSpec("gain variances must be finite and >= 0")
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise InvalidSpec("stability table energies must be strictly increasing")
        if any(b > a for a, b in zip(values, values[1:])):
            raise InvalidSpec("stability table gain variances must be non-increasing")
        object.__setattr__(self, "table", rows)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.table])

    @property
    def gain_variances(self) -> np.ndarray:
        return np.array([v for _, v in self.table])


# Qualitative calibration, not measured data: excess noise dies out at the 1.58 uJ knee.
DEFAULT_STABILITY = PumpStabilityModel((
    (1.20e-6, 0.20),
    (1.30e-6, 0.14),
    (1.40e-6, 0.09),
    (1.50e-6, 0.05),
    (1.57e-6, 0.03),
    (1.58e-6, 0.0),
    (2.00e-6, 0.0),
))


def draw_shots(spec: SourceSpec, shots: int, seed: int, workers: int = 1) -> ShotSeries:
    """Draw per-shot photon numbers.

    Poisson counts come from a stream separate from the gamma gains, so a
    compound source with zero gain variance reproduces the plain Poisson
    source draw for draw.
    """
    if shots < 1:
        raise InvalidSpec("shots must be >= 1")
    mu = spec.mean_photons

    def block(i: int, start: int, stop: int) -> np.ndarray:
        n = stop - start
        if spec.kind == "constant":
            return np.full(n, int(round(mu)), dtype=np.int64)
        rng = substream(seed, "source", i)
        if spec.kind == "thermal":
            # single-mode Bose-Einstein law: geometric on {0, 1, ...} with mean mu
            return rng.geometric(1.0 / (1.0 + mu), size=n).astype(np.int64) - 1
        lam = np.full(n, mu)
        if spec.kind == "compound_poisson" and spec.gain_variance > 0:
            v = spec.gain_variance
            lam = lam * substream(seed, "source-gain", i).gamma(1.0 / v, v, size=n)
        return rng.poisson(lam).astype(np.int64)

    parts = map_blocks(block, shots, workers, BLOCK_SIZE)
    return ShotSeries(np.concatenate(parts), label=spec.kind)


def critical_power(params: MaterialParams) -> float:
    """Marburger self-focusing threshold in watts."""
    lam = params.wavelength_m
    return MARBURGER_COEFF * lam**2 / (8 * math.pi * params.linear_index * params.nonlinear_index_m2_per_W)


def critical_energy(params: MaterialParams) -> float:
    """Pulse energy in joules carried at the critical power, ``P_cr * tau``."""
    return critical_power(params) * params.pulse_duration_s


def stability_lookup(model: PumpStabilityModel, pulse_energy_J: float) -> float:
    e = model.energies
    if not (e[0] <= pulse_energy_J <= e[-1]):
        raise OutOfRange(
            f"pulse energy {pulse_energy_J:g} J outside stability table [{e[0]:g}, {e[-1]:g}] J")
    return float(np.interp(pulse_energy_J, e, model.gain_variances))


def gain_variance_series(model: PumpStabilityModel, energies: Sequence[float]) -> list[float]:
    return [stability_lookup(model, x) for x in energies]
