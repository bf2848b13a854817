"""Spectral kernels: zero-phase band-pass, short-time power spectra, band
power, individual alpha frequency detection, and spatio-spectral
decomposition.

Conventions
-----------
STFT frames are tapered with a periodic Hann window and normalized by the
window energy, so the one-sided bin powers of a frame sum to the windowed
segment energy divided by sum(w**2).  Under this convention a full-scale
sinusoid carries a total in-band power of amplitude**2 / 2 regardless of
the taper, and band power scales with amplitude squared.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
import scipy.linalg
import scipy.signal

from . import config
from .errors import (
    BandOutOfRange,
    NoAlphaPeak,
    NyquistViolation,
    SingularNoise,
    TooShort,
)
from .signals import TimeSeries, WindowPlan, freeze, make_window_plan

FILTER_ORDER = 4  # poles of the recursive band-pass, applied forward-backward


@dataclass(frozen=True)
class BandSpec:
    """A frequency band with its nominal center, 0 < low <= center <= high."""

    center_hz: float
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not (0 < self.low_hz < self.high_hz):
            raise ValueError(f"need 0 < low < high, got [{self.low_hz}, {self.high_hz}]")
        if not (self.low_hz <= self.center_hz <= self.high_hz):
            raise ValueError(
                f"center {self.center_hz} outside [{self.low_hz}, {self.high_hz}]"
            )

    @classmethod
    def around(cls, center_hz: float, half_width_hz: float) -> "BandSpec":
        return cls(center_hz, center_hz - half_width_hz, center_hz + half_width_hz)

    @property
    def width_hz(self) -> float:
        return self.high_hz - self.low_hz


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """One-sided short-time power spectra of a single channel.

    frames is frame_count x bins with bins = window_len // 2 + 1; all
    values are >= 0 in signal-units squared.
    """

    freqs_hz: np.ndarray
    frames: np.ndarray
    plan: WindowPlan
    rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "freqs_hz", freeze(self.freqs_hz))
        object.__setattr__(self, "frames", freeze(self.frames))

    @property
    def bins(self) -> int:
        return self.freqs_hz.shape[0]

    def frame_times_s(self, t0_s: float = 0.0) -> np.ndarray:
        """Center time of each frame."""
        starts = self.plan.frame_starts()
        return t0_s + (starts + self.plan.window_len / 2) / self.rate_hz


@dataclass(frozen=True, eq=False)
class SsdResult:
    """Spatio-spectral decomposition of a multichannel series.

    filters is components x channels (row i projects onto component i),
    patterns is channels x components, eigenvalues is the in-band to flank
    power ratio per component, sorted non-increasing.
    """

    filters: np.ndarray
    patterns: np.ndarray
    eigenvalues: np.ndarray
    band: BandSpec

    def __post_init__(self):
        object.__setattr__(self, "filters", freeze(self.filters))
        object.__setattr__(self, "patterns", freeze(self.patterns))
        object.__setattr__(self, "eigenvalues", freeze(self.eigenvalues))

    @property
    def n_components(self) -> int:
        return self.filters.shape[0]

    def apply(self, series: TimeSeries, n_components: int | None = None) -> TimeSeries:
        """Project `series` onto the leading components."""
        k = self.n_components if n_components is None else n_components
        comps = self.filters[:k] @ series.data
        labels = tuple(f"ssd{i}" for i in range(k))
        return TimeSeries(series.rate_hz, labels, comps, series.t0_s, series.annotations)


def bandpass(series: TimeSeries, low_hz: float, high_hz: float) -> TimeSeries:
    """Zero-phase recursive band-pass (4 poles, forward-backward).

    low_hz = 0 degrades to a low-pass with the same pole count.  Pass-band
    gain stays within [0.9, 1.1] away from the edges and attenuation one
    octave outside the band exceeds 20 dB.
    """
    nyq = series.rate_hz / 2
    if low_hz < 0 or low_hz >= high_hz:
        raise ValueError(f"need 0 <= low < high, got [{low_hz}, {high_hz}]")
    if high_hz >= nyq:
        raise NyquistViolation(f"high edge {high_hz} Hz >= Nyquist {nyq} Hz")
    if low_hz == 0:
        sos = scipy.signal.butter(FILTER_ORDER, high_hz, "lowpass", fs=series.rate_hz, output="sos")
    else:
        sos = scipy.signal.butter(
            FILTER_ORDER // 2, [low_hz, high_hz], "bandpass", fs=series.rate_hz, output="sos"
        )
    data = scipy.signal.sosfiltfilt(sos, series.data, axis=1)
    return TimeSeries(
        series.rate_hz, series.channels, data, series.t0_s, series.annotations, series.units
    )


def stft_power(series: TimeSeries, plan: WindowPlan) -> Spectrogram:
    """Short-time power spectra of a single-channel series.

    Per frame, the one-sided bin powers sum to sum((w*x)**2) / sum(w**2)
    (Parseval under the window-energy normalization).
    """
    if series.n_channels != 1:
        raise ValueError(f"stft_power expects a single channel, got {series.n_channels}")
    if series.n_samples < plan.window_len or plan.frame_count < 1:
        raise TooShort(
            f"{series.n_samples} samples < one window of {plan.window_len}"
        )
    w = scipy.signal.get_window("hann", plan.window_len, fftbins=True)
    w_energy = float(np.sum(w * w))
    x = series.data[0]
    starts = plan.frame_starts()
    segs = np.stack([x[s : s + plan.window_len] for s in starts])
    spec = np.fft.rfft(segs * w, axis=1)
    power = (spec.real**2 + spec.imag**2) / (plan.window_len * w_energy)
    # fold the negative frequencies onto the one-sided bins
    scale = np.full(power.shape[1], 2.0)
    scale[0] = 1.0
    if plan.window_len % 2 == 0:
        scale[-1] = 1.0
    power *= scale
    freqs = np.fft.rfftfreq(plan.window_len, 1.0 / series.rate_hz)
    return Spectrogram(freqs, power, plan, series.rate_hz)


def band_power(spec: Spectrogram, band: BandSpec) -> np.ndarray:
    """Mean power over bins with low_hz <= freq <= high_hz, per frame."""
    mask = (spec.freqs_hz >= band.low_hz) & (spec.freqs_hz <= band.high_hz)
    if not mask.any():
        raise BandOutOfRange(
            f"no bin inside [{band.low_hz}, {band.high_hz}] Hz "
            f"(resolution {spec.freqs_hz[1] - spec.freqs_hz[0]:g} Hz)"
        )
    return spec.frames[:, mask].mean(axis=1)


def mean_spectrum(series: TimeSeries, window_s: float, hop_s: float) -> tuple[np.ndarray, np.ndarray]:
    """(freqs, mean power over frames) of a single-channel series."""
    plan = make_window_plan(series, window_s, hop_s)
    spec = stft_power(series, plan)
    return np.asarray(spec.freqs_hz), spec.frames.mean(axis=0)


def detect_iaf(
    eyes_open: TimeSeries,
    eyes_closed: TimeSeries,
    search_band: BandSpec | None = None,
    *,
    window_s: float = config.DEFAULTS.window_s,
    hop_s: float = config.DEFAULTS.hop_s,
    half_width_hz: float = config.DEFAULTS.alpha_half_width_hz,
) -> BandSpec:
    """Individual alpha frequency from an eyes-open/eyes-closed pair.

    The peak is the argmax, at bin resolution, of the eyes-closed minus
    eyes-open mean spectrum inside the search band (default 6-14 Hz); the
    returned band is peak +/- half_width_hz.  Raises NoAlphaPeak when the
    difference has no positive value in the search band.
    """
    if search_band is None:
        lo, hi = config.DEFAULTS.iaf_search_low_hz, config.DEFAULTS.iaf_search_high_hz
        search_band = BandSpec((lo + hi) / 2, lo, hi)
    if eyes_open.n_channels != 1 or eyes_closed.n_channels != 1:
        raise ValueError("detect_iaf expects single-channel series (average channels first)")
    if eyes_open.rate_hz != eyes_closed.rate_hz:
        raise ValueError("eyes-open and eyes-closed series must share a sample rate")
    for name, s in (("eyes_open", eyes_open), ("eyes_closed", eyes_closed)):
        if s.duration_s < 2.0:
            raise TooShort(f"{name} series of {s.duration_s} s is shorter than 2 s")
    freqs, open_mean = mean_spectrum(eyes_open, window_s, hop_s)
    _, closed_mean = mean_spectrum(eyes_closed, window_s, hop_s)
    diff = closed_mean - open_mean
    mask = (freqs >= search_band.low_hz) & (freqs <= search_band.high_hz)
    if not mask.any():
        raise BandOutOfRange(
            f"no spectral bin inside the search band [{search_band.low_hz}, {search_band.high_hz}] Hz"
        )
    band_freqs = freqs[mask]
    band_diff = diff[mask]
    peak = int(np.argmax(band_diff))
    if band_diff[peak] <= 0:
        raise NoAlphaPeak(
            "eyes-closed spectrum never exceeds eyes-open inside the search band"
        )
    peak_hz = float(band_freqs[peak])
    return BandSpec.around(peak_hz, half_width_hz)


def _second_moment(data: np.ndarray) -> np.ndarray:
    """Channel covariance as a plain second moment (filtered data is zero-mean)."""
    return (data @ data.T) / data.shape[1]


def ssd(
    series: TimeSeries,
    band: BandSpec,
    *,
    flank_hz: float = config.DEFAULTS.ssd_flank_hz,
    gap_hz: float = config.DEFAULTS.ssd_gap_hz,
    shrinkage: float = config.DEFAULTS.ssd_shrinkage,
) -> SsdResult:
    """Spatio-spectral decomposition: maximize in-band over flank power.

    S is the covariance of the series band-passed to `band`; N is the
    covariance of the series band-passed to the flanking bands
    [low - gap - flank, low - gap] and [high + gap, high + gap + flank],
    shrunk by `shrinkage` toward a scaled identity.  Solves the
    generalized eigenproblem S w = mu N w; filters are returned by
    non-increasing mu and are orthonormal under the regularized flank
    covariance.  Signs are fixed so each filter's largest-magnitude
    coefficient is positive.
    """
    if not (0 <= shrinkage < 1):
        raise ValueError(f"shrinkage must be in [0, 1), got {shrinkage}")
    nyq = series.rate_hz / 2
    left = (band.low_hz - gap_hz - flank_hz, band.low_hz - gap_hz)
    right = (band.high_hz + gap_hz, band.high_hz + gap_hz + flank_hz)
    if left[0] < 0:
        raise ValueError(
            f"lower flank [{left[0]}, {left[1]}] Hz extends below 0 Hz; "
            "shrink flank_hz or gap_hz"
        )
    if right[1] >= nyq:
        raise NyquistViolation(f"upper flank edge {right[1]} Hz >= Nyquist {nyq} Hz")
    n_ch = series.n_channels
    sig = bandpass(series, band.low_hz, band.high_hz)
    s_cov = _second_moment(sig.data)
    n_cov = _second_moment(bandpass(series, *left).data) + _second_moment(
        bandpass(series, *right).data
    )
    n_reg = (1 - shrinkage) * n_cov + shrinkage * (np.trace(n_cov) / n_ch) * np.eye(n_ch)
    try:
        eigvals, eigvecs = scipy.linalg.eigh(s_cov, n_reg)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularNoise(f"flank covariance is not positive definite: {exc}") from exc
    if not np.all(np.isfinite(eigvals)):
        raise SingularNoise("flank covariance is numerically singular")
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    filters = eigvecs[:, order].T
    # deterministic sign: largest-magnitude coefficient of each filter is positive
    for i in range(filters.shape[0]):
        j = int(np.argmax(np.abs(filters[i])))
        if filters[i, j] < 0:
            filters[i] = -filters[i]
    w = filters.T  # channels x components
    patterns = s_cov @ w @ np.linalg.pinv(w.T @ s_cov @ w)
    return SsdResult(filters, patterns, eigvals, band)
