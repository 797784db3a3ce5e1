"""Photon-number statistics with simulated SiPM photon-number-resolving detection."""

from .errors import (
    ConfigError,
    DegenerateRange,
    InvalidSpec,
    IrregularSpacing,
    LengthMismatch,
    NegativeMean,
    NoPeaks,
    OutOfRange,
    ParseError,
    PnrStatsError,
    ShotIOError,
    ZeroMean,
)
from .stats import (
    PairedShotSeries,
    PhotonNumberDistribution,
    ShotSeries,
    StatsReport,
    bootstrap_uncertainty,
    empirical_distribution,
    fano,
    fidelity,
    g11_cross,
    g2_detected,
    g2_photon,
    mean,
    poisson_pmf,
    summarize,
)
from .sources import (
    DEFAULT_STABILITY,
    MaterialParams,
    PumpStabilityModel,
    SourceSpec,
    critical_energy,
    critical_power,
    draw_shots,
    stability_lookup,
)
from .detector import (
    AnalogShotSeries,
    DetectorConfig,
    SplitterConfig,
    crosstalk_cascade_mean,
    detect,
    split_beam,
    synthesize_pulse_heights,
)
from .phs import Histogram, PhsCalibration, build_histogram, calibrate, quantize

__version__ = "0.1.0"
