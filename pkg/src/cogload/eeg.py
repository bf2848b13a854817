"""EEG workload pipelines: band-power courses, normalization, theta/alpha
ratio, and blink counting.

Two chain orders are supported for the alpha course.  The default computes
a spectrum per electrode and averages the band powers afterwards; the
average_first flag instead averages the channels element-wise before any
spectral analysis.  Electrode averaging always reduces in label-sorted
order, so a request is insensitive to electrode ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import config
from .errors import MissingChannel, UnknownChannel, ZeroAlphaFrame, ZeroBaseline
from .signals import TimeSeries, channel_mean, freeze, make_window_plan, select_channels, trim_edges
from .spectral import BandSpec, band_power, bandpass, ssd, stft_power


@dataclass(frozen=True, eq=False)
class PowerCourse:
    """Band power per analysis frame, with the frame center times."""

    values: np.ndarray
    frame_times_s: np.ndarray
    band: BandSpec
    normalized: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        times = np.asarray(self.frame_times_s, dtype=float)
        if vals.shape != times.shape:
            raise ValueError("values and frame_times_s must have equal length")
        object.__setattr__(self, "values", freeze(vals))
        object.__setattr__(self, "frame_times_s", freeze(times))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BlinkReport:
    """Blink events found on the frontal pair."""

    count: int
    per_minute: float
    blink_times_s: tuple[float, ...]


def _course(
    filtered: TimeSeries, band: BandSpec, window_s: float, hop_s: float
) -> PowerCourse:
    """Per-channel spectra -> band powers -> mean across channels."""
    plan = make_window_plan(filtered, window_s, hop_s)
    powers = []
    spec = None
    for c in range(filtered.n_channels):
        chan = TimeSeries(filtered.rate_hz, (filtered.channels[c],), filtered.data[c : c + 1])
        spec = stft_power(chan, plan)
        powers.append(band_power(spec, band))
    values = np.mean(powers, axis=0)
    times = spec.frame_times_s(filtered.t0_s)
    return PowerCourse(values, times, band)


def band_course(
    series: TimeSeries,
    band: BandSpec,
    *,
    window_s: float = config.DEFAULTS.window_s,
    hop_s: float = config.DEFAULTS.hop_s,
) -> PowerCourse:
    """Band power course over all channels, with no prefilter or selection."""
    return _course(series, band, window_s, hop_s)


def iaf_course(
    series: TimeSeries,
    iaf: BandSpec,
    electrodes=config.OCCIPITAL_ELECTRODES,
    *,
    window_s: float = config.DEFAULTS.window_s,
    hop_s: float = config.DEFAULTS.hop_s,
    edge_trim_s: float = 0.0,
    low_hz: float = config.DEFAULTS.broadband_low_hz,
    high_hz: float = config.DEFAULTS.broadband_high_hz,
    average_first: bool = False,
) -> PowerCourse:
    """Alpha-band power course over the requested electrodes.

    Chain: select electrodes (sorted by label), optional edge trim,
    broadband zero-phase filter, then either per-channel spectra with the
    band powers averaged across electrodes (default) or an element-wise
    channel mean before a single spectral pass (average_first).
    """
    sel = select_channels(series, sorted(electrodes))
    if edge_trim_s > 0:
        sel = trim_edges(sel, edge_trim_s)
    filtered = bandpass(sel, low_hz, high_hz)
    if average_first:
        filtered = channel_mean(filtered)
    return _course(filtered, iaf, window_s, hop_s)


def theta_course(
    series: TimeSeries,
    electrodes=config.FRONTAL_ELECTRODES,
    *,
    band: BandSpec | None = None,
    window_s: float = config.DEFAULTS.window_s,
    hop_s: float = config.DEFAULTS.hop_s,
    edge_trim_s: float = 0.0,
    flank_hz: float = config.DEFAULTS.ssd_flank_hz,
    gap_hz: float = config.DEFAULTS.ssd_gap_hz,
    shrinkage: float = config.DEFAULTS.ssd_shrinkage,
) -> PowerCourse:
    """Theta-band power course over the requested electrodes.

    With two or more electrodes the series is reduced to the first
    spatio-spectral component for the theta band; a single electrode falls
    back to the plain broadband filter.  The band defaults to the 5 +/- 2 Hz
    theta band.
    """
    if band is None:
        band = BandSpec.around(
            config.DEFAULTS.theta_center_hz, config.DEFAULTS.theta_half_width_hz
        )
    sel = select_channels(series, sorted(electrodes))
    if edge_trim_s > 0:
        sel = trim_edges(sel, edge_trim_s)
    if sel.n_channels >= 2:
        result = ssd(sel, band, flank_hz=flank_hz, gap_hz=gap_hz, shrinkage=shrinkage)
        reduced = result.apply(sel, 1)
    else:
        reduced = bandpass(
            sel, config.DEFAULTS.broadband_low_hz, config.DEFAULTS.broadband_high_hz
        )
    return _course(reduced, band, window_s, hop_s)


def normalize_course(course: PowerCourse, baseline: PowerCourse) -> PowerCourse:
    """Divide a course by the mean power of a baseline course (same band)."""
    if course.band != baseline.band:
        raise ValueError(
            f"course band {course.band} differs from baseline band {baseline.band}"
        )
    if baseline.n_frames == 0:
        raise ZeroBaseline("baseline course is empty")
    mean = float(baseline.values.mean())
    if mean <= 0:
        raise ZeroBaseline(f"baseline mean power {mean} is not positive")
    return PowerCourse(course.values / mean, course.frame_times_s, course.band, True)


def theta_alpha_ratio(theta: PowerCourse, alpha: PowerCourse) -> np.ndarray:
    """Frame-wise theta / alpha power ratio."""
    if theta.n_frames != alpha.n_frames or not np.array_equal(
        theta.frame_times_s, alpha.frame_times_s
    ):
        raise ValueError("theta and alpha courses must share frame times")
    zero = np.flatnonzero(alpha.values == 0)
    if zero.size:
        raise ZeroAlphaFrame(int(zero[0]))
    return theta.values / alpha.values


def count_blinks(
    series: TimeSeries,
    threshold_uv: float = config.DEFAULTS.blink_threshold_uv,
    refractory_s: float = config.DEFAULTS.blink_refractory_s,
    channels: tuple[str, str] = ("Fp1", "Fp2"),
) -> BlinkReport:
    """Count blink events on the rectified mean of the frontal pair.

    A blink starts when mean(|Fp1|, |Fp2|) crosses the threshold upward;
    crossings closer than refractory_s to the previous event merge into it.
    """
    try:
        pair = select_channels(series, channels)
    except UnknownChannel as exc:
        raise MissingChannel(str(exc)) from exc
    envelope = np.abs(pair.data).mean(axis=0)
    above = envelope >= threshold_uv
    rising = above & ~np.concatenate([[False], above[:-1]])
    crossing_times = series.t0_s + np.flatnonzero(rising) / series.rate_hz
    events: list[float] = []
    for t in crossing_times:
        if not events or t - events[-1] >= refractory_s:
            events.append(float(t))
    per_minute = len(events) / (series.duration_s / 60.0)
    return BlinkReport(len(events), per_minute, tuple(events))
