"""SiPM measurement chain: splitting, loss, cell occupancy, dark counts,
optical cross-talk and pulse-height synthesis.

Each call represents gated integration: one element of a series is one gate.
Every stage draws from its own substream, keyed by block, so stages can be
switched on or off without perturbing the randomness of the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidSpec, OutOfRange
from .rng import map_blocks, substream
from .stats import PairedShotSeries, ShotSeries


@dataclass(frozen=True)
class DetectorConfig:
    """SiPM parameters.

    Attributes
    ----------
    efficiency : float
        Per-photon detection probability.
    dark_mean : float
        Mean number of dark-fired cells per gate.
    crosstalk : float
        Mean number of neighbours a fired cell triggers (Borel branching
        parameter); must stay below 1.
    cell_count : int
        Number of Geiger cells sharing the output.
    gain, gain_spread : float
        Mean and standard deviation of the analog charge of one fired cell.
    baseline_noise : float
        Standard deviation of the additive electronic noise per gate.
    """

    efficiency: float = 0.4
    dark_mean: float = 0.003
    crosstalk: float = 0.0
    cell_count: int = 667
    gain: float = 100.0
    gain_spread: float = 3.0
    baseline_noise: float = 4.0

    def __post_init__(self):
        def finite(name):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidSpec(f"{name} must be a finite number, got {v!r}")
            return v

        if not 0 <= finite("efficiency") <= 1:
            raise InvalidSpec("efficiency must lie in [0, 1]")
        if finite("dark_mean") < 0:
            raise InvalidSpec("dark_mean must be >= 0")
        if not 0 <= finite("crosstalk") < 1:
            raise InvalidSpec("crosstalk must lie in [0, 1)")
        if isinstance(self.cell_count, bool) or int(self.cell_count) != self.cell_count or self.cell_count < 1:
            raise InvalidSpec("cell_count must be an integer >= 1")
        object.__setattr__(self, "cell_count", int(self.cell_count))
        if finite("gain") <= 0:
            raise InvalidSpec("gain must be > 0")
        if finite("gain_spread") < 0 or finite("baseline_noise") < 0:
            raise InvalidSpec("gain_spread and baseline_noise must be >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SplitterConfig:
    """Polarizing beam splitter balanced by a half-wave plate."""

    transmittance: float = 0.5

    def __post_init__(self):
        t = self.transmittance
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0 <= t <= 1:
            raise InvalidSpec("transmittance must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class AnalogShotSeries:
    """Integrated pulse heights (arbitrary units), one per gate."""

    values: np.ndarray
    config_echo: Optional[DetectorConfig] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("an analog series needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("analog values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnalogShotSeries):
            return NotImplemented
        return np.array_equal(self.values, other.values) and self.config_echo == other.config_echo

    __hash__ = None  # type: ignore[assignment]


def split_beam(photons: ShotSeries, splitter: SplitterConfig, seed: int,
               workers: int = 1) -> PairedShotSeries:
    """Route every photon independently to arm 1 with probability ``transmittance``."""
    counts = photons.counts
    t = splitter.transmittance

    def block(i, start, stop):
        return substream(seed, "split", i).binomial(counts[start:stop], t)

    arm1 = np.concatenate(map_blocks(block, counts.size, workers))
    return PairedShotSeries(ShotSeries(arm1, photons.label), ShotSeries(counts - arm1, photons.label))


def attenuate(photons: ShotSeries, transmittance: float, seed: int, workers: int = 1) -> ShotSeries:
    """Neutral density filter: binomial thinning of every shot."""
    counts = photons.counts

    def block(i, start, stop):
        return substream(seed, "nd-filter", i).binomial(counts[start:stop], transmittance)

    return ShotSeries(np.concatenate(map_blocks(block, counts.size, workers)), photons.label)


def _occupied_cells(hits: np.ndarray, cells: int, rng: np.random.Generator) -> np.ndarray:
    """Number of distinct cells hit when ``hits[i]`` photons land uniformly at random."""
    total = int(hits.sum())
    if total == 0:
        return np.zeros_like(hits)
    shot = np.repeat(np.arange(hits.size, dtype=np.int64), hits)
    cell = rng.integers(0, cells, size=total, dtype=np.int64)
    if cells == 1:
        return np.minimum(hits, 1)
    # sort by (shot, cell); a hit is new unless it repeats the previous pair
    key = np.lexsort((cell, shot))
    shot, cell = shot[key], cell[key]
    new = np.ones(total, dtype=bool)
    new[1:] = (shot[1:] != shot[:-1]) | (cell[1:] != cell[:-1])
    return np.bincount(shot[new], minlength=hits.size).astype(np.int64)


def borel_cascade(primaries: np.ndarray, crosstalk: float, cap: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Total size of Poisson(``crosstalk``) branching cascades seeded by ``primaries``.

    Each fired cell triggers a Poisson number of secondaries, which trigger
    their own, and so on; the total per primary is Borel distributed. Totals
    are capped at ``cap``.
    """
    total = primaries.astype(np.int64).copy()
    if crosstalk == 0:
        return np.minimum(total, cap)
    front = total.copy()
    while True:
        live = (front > 0) & (total < cap)
        if not live.any():
            break
        born = np.zeros_like(front)
        born[live] = rng.poisson(crosstalk * front[live])
        total += born
        front = born
    return np.minimum(total, cap)


def detect(photons: ShotSeries, config: DetectorConfig, seed: int,
           workers: int = 1) -> ShotSeries:
    """Number of fired cells per gate.

    Pipeline per shot: binomial loss with the quantum efficiency, uniform
    random cell assignment (a cell fires at most once), Poisson dark firings
    on the remaining free cells, then a Borel cross-talk cascade from every
    fired cell, capped at the cell count.
    """
    counts = photons.counts
    cells = config.cell_count

    def block(i, start, stop):
        n = counts[start:stop]
        survivors = substream(seed, "loss", i).binomial(n, config.efficiency)
        fired = _occupied_cells(survivors, cells, substream(seed, "cells", i))
        if config.dark_mean > 0:
            dark = substream(seed, "dark", i).poisson(config.dark_mean, size=n.size)
            fired = fired + np.minimum(dark, cells - fired)
        return borel_cascade(fired, config.crosstalk, cells, substream(seed, "crosstalk", i))

    out = np.concatenate(map_blocks(block, counts.size, workers))
    return ShotSeries(out, photons.label)


def crosstalk_cascade_mean(crosstalk: float) -> float:
    """Mean Borel cascade size per primary fired cell, ``1 / (1 - crosstalk)``."""
    if not 0 <= crosstalk < 1:
        raise OutOfRange(f"crosstalk must lie in [0, 1), got {crosstalk!r}")
    return 1.0 / (1.0 - crosstalk)


def synthesize_pulse_heights(fired: ShotSeries, config: DetectorConfig, seed: int,
                             workers: int = 1) -> AnalogShotSeries:
    """Gated charge: a Gaussian charge per fired cell plus baseline noise.

    The sum of ``k`` independent ``Normal(gain, gain_spread)`` charges is
    drawn directly as ``Normal(k * gain, gain_spread * sqrt(k))``.
    """
    counts = fired.counts

    def block(i, start, stop):
        k = counts[start:stop]
        rng = substream(seed, "pulse-height", i)
        z_cells = rng.standard_normal(k.size)
        z_base = rng.standard_normal(k.size)
        return k * config.gain + config.gain_spread * np.sqrt(k) * z_cells + config.baseline_noise * z_base

    values = np.concatenate(map_blocks(block, counts.size, workers))
    return AnalogShotSeries(values, config)
