"""Shot series types and the photon-statistics estimators.

Conventions
-----------
``m`` denotes a per-shot count (detected photons or fired cells).  Moment
ratios use raw (1/N) moments; the Fano factor uses the unbiased (N-1)
variance.  Two autocorrelation conventions coexist:

* ``g2_detected`` -- ``<m^2>/<m>^2``, equal to ``1 + 1/<m>`` for Poisson light;
* ``g2_photon``   -- the normally ordered form ``<m^2>/<m>^2 - 1/<m>``,
  equal to 1 for Poisson light.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import LengthMismatch, NegativeMean, ZeroMean
from .rng import substream

# pmf entries below this are treated as outside the support
NEGLIGIBLE = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ShotSeries:
    """Non-negative integer counts, one per laser trigger."""

    counts: np.ndarray
    label: str = ""

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if raw.size == 0:
            raise ValueError("a shot series needs at least one shot")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
                raise ValueError("counts must be integers")
        elif raw.dtype.kind not in "iub":
            raise ValueError(f"counts must be integers, got dtype {raw.dtype}")
        arr = raw.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", _frozen(arr))

    def __len__(self) -> int:
        return self.counts.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShotSeries):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.counts, other.counts)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class PairedShotSeries:
    """Shot-by-shot paired counts from the two outputs of a beam splitter."""

    arm1: ShotSeries
    arm2: ShotSeries

    def __post_init__(self):
        if len(self.arm1) != len(self.arm2):
            raise LengthMismatch(
                f"arms differ in length: {len(self.arm1)} vs {len(self.arm2)}")

    def __len__(self) -> int:
        return len(self.arm1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PairedShotSeries):
            return NotImplemented
        return self.arm1 == other.arm1 and self.arm2 == other.arm2

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_arrays(cls, arm1, arm2, label: str = "") -> "PairedShotSeries":
        return cls(ShotSeries(arm1, label), ShotSeries(arm2, label))


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Probability mass function over ``m = 0 .. len(probs) - 1``.

    ``sample_count`` is the number of shots behind an empirical histogram and
    0 for analytic distributions.
    """

    probs: np.ndarray
    uncertainties: Optional[np.ndarray] = None
    sample_count: int = 0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if p.sum() > 1 + 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r} > 1")
        u = np.zeros_like(p) if self.uncertainties is None else np.asarray(self.uncertainties, dtype=float)
        if u.shape != p.shape:
            raise ValueError("uncertainties must match probs in shape")
        if np.any(u < 0):
            raise ValueError("uncertainties must be non-negative")
        if self.sample_count < 0:
            raise ValueError("sample_count must be non-negative")
        object.__setattr__(self, "probs", _frozen(p))
        object.__setattr__(self, "uncertainties", _frozen(u.copy()))
        object.__setattr__(self, "sample_count", int(self.sample_count))

    def __len__(self) -> int:
        return self.probs.size

    @property
    def max_count(self) -> int:
        return self.probs.size - 1

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(max(size, self.probs.size))
        out[: self.probs.size] = self.probs
        return out

    def mean(self) -> float:
        m = np.arange(self.probs.size)
        if self.sample_count:
            # recover the integer histogram so the result matches mean(series) bit for bit
            hist = np.rint(self.probs * self.sample_count).astype(np.int64)
            return int(np.dot(m, hist)) / self.sample_count
        return float(np.dot(m, self.probs) / self.probs.sum())


@dataclass(frozen=True)
class StatsReport:
    mean: float
    variance: float
    fano: float
    g2: float
    g2_uncertainty: float
    shot_count: int
    g11: Optional[float] = None
    g11_uncertainty: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "mean": self.mean,
            "variance": self.variance,
            "fano": self.fano,
            "g2": self.g2,
            "g2_uncertainty": self.g2_uncertainty,
            "shot_count": self.shot_count,
        }
        if self.g11 is not None:
            d["g11"] = self.g11
            d["g11_uncertainty"] = self.g11_uncertainty
        return d


# ---------------------------------------------------------------------------
# estimators

def _counts(series: Union[ShotSeries, np.ndarray, Sequence[int]]) -> np.ndarray:
    if isinstance(series, ShotSeries):
        return series.counts
    return ShotSeries(series).counts


def mean(series: ShotSeries) -> float:
    c = _counts(series)
    return int(c.sum()) / c.size


def _positive_mean(c: np.ndarray) -> float:
    mu = int(c.sum()) / c.size
    if mu == 0:
        raise ZeroMean("mean count is zero")
    return mu


def variance(series: ShotSeries) -> float:
    """Unbiased sample variance; 0 for a single shot."""
    c = _counts(series)
    if c.size < 2:
        return 0.0
    return float(np.var(c, ddof=1))


def fano(series: ShotSeries) -> float:
    c = _counts(series)
    mu = _positive_mean(c)
    return variance(c) / mu


def g2_detected(series: ShotSeries) -> float:
    """Raw second-moment ratio ``<m^2>/<m>^2`` (no shot-noise subtraction)."""
    c = _counts(series)
    mu = _positive_mean(c)
    return (int(np.dot(c, c)) / c.size) / mu**2


def g2_photon(series: ShotSeries) -> float:
    """Normally ordered autocorrelation ``<m^2>/<m>^2 - 1/<m>``."""
    c = _counts(series)
    mu = _positive_mean(c)
    return (int(np.dot(c, c)) / c.size) / mu**2 - 1.0 / mu


def g11_cross(pair: PairedShotSeries) -> float:
    """Shot-by-shot cross-correlation ``<m1 m2> / (<m1><m2>)``."""
    a, b = pair.arm1.counts, pair.arm2.counts
    mu1, mu2 = _positive_mean(a), _positive_mean(b)
    return (int(np.dot(a, b)) / a.size) / (mu1 * mu2)


def empirical_distribution(series: ShotSeries) -> PhotonNumberDistribution:
    c = _counts(series)
    n = c.size
    hist = np.bincount(c)
    p = hist / n
    err = np.sqrt(p * (1 - p) / n)
    return PhotonNumberDistribution(p, err, sample_count=n)


def poisson_pmf(mean: float, cutoff: int) -> PhotonNumberDistribution:
    """Poisson pmf for ``m = 0 .. cutoff`` evaluated in log space."""
    if not mean >= 0:  # also rejects NaN
        raise NegativeMean(f"Poisson mean must be >= 0, got {mean!r}")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    m = np.arange(int(cutoff) + 1, dtype=float)
    if mean == 0:
        p = np.zeros(m.size)
        p[0] = 1.0
    else:
        p = np.exp(m * np.log(mean) - mean - gammaln(m + 1))
    return PhotonNumberDistribution(p)


def poisson_cutoff(mean: float) -> int:
    """A cutoff large enough that the truncated Poisson mass is >= 1 - 1e-9."""
    return int(np.ceil(mean + 12 * np.sqrt(mean) + 20))


def fidelity(p: PhotonNumberDistribution, q: PhotonNumberDistribution) -> float:
    """Overlap ``sum sqrt(p q)`` up to the last index where either pmf is non-negligible."""
    size = max(len(p), len(q))
    a, b = p.padded(size), q.padded(size)
    support = np.nonzero(np.maximum(a, b) > NEGLIGIBLE)[0]
    if support.size == 0:
        return 0.0
    top = support[-1] + 1
    f = float(np.sum(np.sqrt(a[:top] * b[:top])))
    return min(max(f, 0.0), 1.0)


# ---------------------------------------------------------------------------
# resampling

Statistic = Union[str, Callable]

_SINGLE = ("mean", "fano", "g2_detected", "g2_photon")


def _weighted_single(name: str, v: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    s1 = w @ v
    mu = s1 / n
    if name == "mean":
        return mu
    if np.any(mu == 0):
        raise ZeroMean("a bootstrap resample has zero mean")
    s2 = w @ (v * v)
    if name == "fano":
        var = (s2 - s1 * s1 / n) / (n - 1) if n > 1 else np.zeros_like(s1)
        return np.maximum(var, 0.0) / mu
    g2 = (s2 / n) / mu**2
    if name == "g2_detected":
        return g2
    return g2 - 1.0 / mu


def _bootstrap_distinct(series, statistic: str, resamples: int, rng) -> np.ndarray:
    """Resample via multinomial weights on the distinct observed values.

    For integer count data with few distinct values this is equivalent in
    distribution to drawing N indices with replacement, at a fraction of the cost.
    """
    n = len(series)
    if isinstance(series, PairedShotSeries):
        if statistic != "g11_cross":
            raise ValueError(f"statistic {statistic!r} is not defined for paired series")
        rows, freq = np.unique(np.column_stack([series.arm1.counts, series.arm2.counts]),
                               axis=0, return_counts=True)
        w = rng.multinomial(n, freq / n, size=resamples).astype(float)
        v1, v2 = rows[:, 0].astype(float), rows[:, 1].astype(float)
        mu1, mu2 = (w @ v1) / n, (w @ v2) / n
        if np.any(mu1 == 0) or np.any(mu2 == 0):
            raise ZeroMean("a bootstrap resample has zero mean in one arm")
        return ((w @ (v1 * v2)) / n) / (mu1 * mu2)
    if statistic not in _SINGLE:
        raise ValueError(f"unknown statistic {statistic!r}")
    values, freq = np.unique(series.counts, return_counts=True)
    w = rng.multinomial(n, freq / n, size=resamples).astype(float)
    return _weighted_single(statistic, values.astype(float), w, n)


def _bootstrap_generic(series, statistic: Callable, resamples: int, rng) -> np.ndarray:
    n = len(series)
    out = np.empty(resamples)
    for i in range(resamples):
        idx = rng.integers(0, n, size=n)
        if isinstance(series, PairedShotSeries):
            sample = PairedShotSeries(ShotSeries(series.arm1.counts[idx]),
                                      ShotSeries(series.arm2.counts[idx]))
        else:
            sample = ShotSeries(series.counts[idx])
        out[i] = statistic(sample)
    return out


def bootstrap_uncertainty(series: Union[ShotSeries, PairedShotSeries],
                          statistic: Statistic = "g2_detected",
                          resamples: int = 1000, seed: int = 0) -> float:
    """Bootstrap standard error of ``statistic`` (1 sigma, deterministic in ``seed``).

    Parameters
    ----------
    series : ShotSeries or PairedShotSeries
    statistic : str or callable
        One of ``"mean"``, ``"fano"``, ``"g2_detected"``, ``"g2_photon"``
        (single series) or ``"g11_cross"`` (paired), or any callable mapping a
        resampled series to a float.
    resamples : int
        Number of resamples, at least 100.
    seed : int
    """
    if resamples < 100:
        raise ValueError("bootstrap needs at least 100 resamples")
    rng = substream(seed, "bootstrap")
    if callable(statistic):
        stats = _bootstrap_generic(series, statistic, resamples, rng)
    else:
        stats = _bootstrap_distinct(series, statistic, resamples, rng)
    if np.ptp(stats) == 0:
        return 0.0
    return float(np.std(stats, ddof=1))


def summarize(series: ShotSeries, resamples: int = 1000, seed: int = 0,
              partner: Optional[ShotSeries] = None) -> StatsReport:
    """Point estimates and bootstrap errors for one detector arm.

    When ``partner`` is given, the cross-correlation with that arm is included.
    """
    g11 = g11_err = None
    if partner is not None:
        pair = PairedShotSeries(series, partner)
        g11 = g11_cross(pair)
        g11_err = bootstrap_uncertainty(pair, "g11_cross", resamples, seed)
    return StatsReport(
        mean=mean(series),
        variance=variance(series),
        fano=fano(series),
        g2=g2_detected(series),
        g2_uncertainty=bootstrap_uncertainty(series, "g2_detected", resamples, seed),
        shot_count=len(series),
        g11=g11,
        g11_uncertainty=g11_err,
    )
