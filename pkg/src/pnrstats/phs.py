"""Pulse-height spectrum analysis: histogram, peak calibration, quantization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .detector import AnalogShotSeries, DetectorConfig
from .errors import DegenerateRange, IrregularSpacing, NoPeaks
from .stats import ShotSeries

DEFAULT_BIN_COUNT = 1000
PROMINENCE_FLOOR = 0.02
MAX_SPACING_DEVIATION = 0.25


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if counts.shape != (edges.size - 1,):
            raise ValueError("need exactly one count per bin")
        if np.any(counts < 0):
            raise ValueError("bin counts must be non-negative")
        edges.setflags(write=False)
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class PhsCalibration:
    """Mapping from pulse height to photon number.

    ``thresholds[k]`` separates ``m = k`` from ``m = k + 1``. ``peaks`` holds
    the peak centres that were actually resolved in the spectrum.
    """

    offset: float
    peak_spacing: float
    thresholds: tuple[float, ...]
    peaks: tuple[float, ...] = ()

    def __post_init__(self):
        if not (math.isfinite(self.peak_spacing) and self.peak_spacing > 0):
            raise ValueError("peak_spacing must be > 0")
        t = tuple(float(x) for x in self.thresholds)
        if not t:
            raise ValueError("a calibration needs at least one threshold")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "peaks", tuple(float(x) for x in self.peaks))

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "peak_spacing": self.peak_spacing,
            "thresholds": list(self.thresholds),
            "peaks": list(self.peaks),
        }


def build_histogram(analog: AnalogShotSeries, bin_count: int = DEFAULT_BIN_COUNT) -> Histogram:
    """Uniform-width histogram spanning the data range."""
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    v = analog.values
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        raise DegenerateRange(f"all {v.size} pulse heights equal {lo!r}")
    counts, edges = np.histogram(v, bins=int(bin_count), range=(lo, hi))
    return Histogram(edges, counts)


def smoothing_window(bin_count: int) -> int:
    w = max(3, math.ceil(bin_count / 50))
    return w if w % 2 else w + 1


def _smooth(counts: np.ndarray, window: int) -> np.ndarray:
    return np.convolve(counts.astype(float), np.ones(window) / window, mode="same")


def calibrate(hist: Histogram, prominence: float = PROMINENCE_FLOOR,
              pedestal: float | None = None) -> PhsCalibration:
    """Locate the equally spaced photon peaks and the valleys between them.

    Peaks are local maxima of a moving-average smoothed spectrum whose
    prominence exceeds ``prominence`` times its maximum.  Valleys between
    resolved neighbours become thresholds; elsewhere thresholds sit halfway
    between extrapolated peak positions.  If the spectrum extends more than
    half a spacing below the first resolved peak, the peak grid is continued
    downwards so that the offset still marks the zero-photon position.

    Parameters
    ----------
    hist : Histogram
        Pulse-height spectrum.
    prominence : float
        Peak prominence floor as a fraction of the smoothed maximum.
    pedestal : float, optional
        Known zero-photon pulse height.  When given, the grid is also
        continued down to it, which matters for bright runs whose spectrum
        starts several peaks above zero.
    """
    counts = hist.counts
    nbins = counts.size
    window = smoothing_window(nbins)
    smooth = _smooth(counts, window)
    if smooth.max() <= 0:
        raise NoPeaks("empty histogram")

    # zero padding lets a maximum in the first or last bin count as a peak
    padded = np.concatenate([[0.0], smooth, [0.0]])
    floor = prominence * smooth.max()
    idx, _ = find_peaks(padded, prominence=floor)
    if idx.size >= 3:
        # noise can split a sparse high-m peak; require half the typical gap
        min_gap = 0.5 * float(np.median(np.diff(idx)))
        if min_gap > 1:
            idx, _ = find_peaks(padded, prominence=floor, distance=min_gap)
    idx = idx - 1
    if idx.size < 2:
        raise NoPeaks(f"found {idx.size} peak(s); need at least 2")

    # sub-bin centres: centroid of raw counts around each smoothed maximum
    x = np.arange(nbins, dtype=float)
    pos = []
    for p in idx:
        lo, hi = max(0, p - window), min(nbins, p + window + 1)
        w = counts[lo:hi].astype(float)
        pos.append(np.dot(x[lo:hi], w) / w.sum() if w.sum() > 0 else float(p))
    pos = np.asarray(pos)

    gaps = np.diff(pos)
    spacing = float(np.median(gaps))
    dev = np.abs(gaps - spacing) / spacing
    if np.any(dev > MAX_SPACING_DEVIATION):
        raise IrregularSpacing(
            f"inter-peak distances {np.round(gaps, 2).tolist()} (bins) deviate up to "
            f"{dev.max():.0%} from their median")

    valleys = []
    for a, b in zip(idx[:-1], idx[1:]):
        seg = smooth[a:b + 1]
        low = np.flatnonzero(seg <= seg.min() + 1e-12 * smooth.max())
        valleys.append(a + low.mean())

    # bin index -> pulse-height units
    width = hist.bin_edges[1] - hist.bin_edges[0]
    to_x = lambda i: hist.bin_edges[0] + (np.asarray(i, dtype=float) + 0.5) * width
    peaks = to_x(pos)
    step = spacing * width
    thresholds = list(to_x(valleys))

    offset = float(peaks[0])
    below = []
    floor_x = hist.bin_edges[0] if pedestal is None else min(hist.bin_edges[0], pedestal)
    while offset - 0.5 * step > floor_x:
        offset -= step
        below.insert(0, offset + 0.5 * step)
    thresholds = below + thresholds

    top = hist.bin_edges[-1]
    last_peak = float(peaks[-1])
    while last_peak + 0.5 * step <= top:
        thresholds.append(last_peak + 0.5 * step)
        last_peak += step
    return PhsCalibration(offset, step, tuple(thresholds), tuple(peaks))


def nominal_calibration(config: DetectorConfig, max_count: int = 64) -> PhsCalibration:
    """Calibration implied by the detector gain alone: zero offset, midpoint thresholds."""
    g = config.gain
    return PhsCalibration(0.0, g, tuple((k + 0.5) * g for k in range(max_count + 1)))


def quantize(analog: AnalogShotSeries, cal: PhsCalibration) -> ShotSeries:
    """Photon number = number of thresholds lying strictly below the value.

    Above the last listed threshold the grid continues at ``peak_spacing``.
    """
    v = analog.values
    t = np.asarray(cal.thresholds)
    m = np.searchsorted(t, v, side="left").astype(np.int64)
    over = v > t[-1]
    if over.any():
        extra = np.ceil((v[over] - t[-1]) / cal.peak_spacing).astype(np.int64) - 1
        m[over] = t.size + np.maximum(extra, 0)
    return ShotSeries(m)
