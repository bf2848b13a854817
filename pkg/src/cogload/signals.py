"""Immutable time-series containers and windowing arithmetic.

Sample k of a series lies at t0_s + k / rate_hz.  Data arrays are frozen
(writeable=False) and every operation returns a new value, which is what
makes the batch pipelines safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .errors import TooShort, UnknownChannel, ZeroLengthWindow

Annotation = tuple[float, str]


def freeze(a: np.ndarray) -> np.ndarray:
    """Return an owned, read-only float64 copy of `a`."""
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled multichannel signal.

    Parameters
    ----------
    rate_hz : sample rate, > 0.
    channels : one label per data row.
    data : channels x samples array (a single 1-d row is accepted and
        reshaped).  Stored read-only.
    t0_s : absolute time of the first sample.
    annotations : (time_s, tag) pairs; stored sorted by time, each time
        must fall inside [t0_s, t0_s + duration].
    units : per-channel unit strings (uV, mm, px, ...); purely metadata.
    """

    rate_hz: float
    channels: tuple[str, ...]
    data: np.ndarray
    t0_s: float = 0.0
    annotations: tuple[Annotation, ...] = ()
    units: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.ndim != 2:
            raise ValueError(f"data must be channels x samples, got shape {data.shape}")
        channels = tuple(self.channels)
        if data.shape[0] != len(channels):
            raise ValueError(
                f"{len(channels)} channel labels for {data.shape[0]} data rows"
            )
        units = tuple(self.units) if self.units else ("",) * len(channels)
        if len(units) != len(channels):
            raise ValueError(f"{len(units)} units for {len(channels)} channels")
        end = self.t0_s + data.shape[1] / self.rate_hz
        anns = tuple(sorted((float(t), str(tag)) for t, tag in self.annotations))
        for t, tag in anns:
            if not (self.t0_s <= t <= end):
                raise ValueError(f"annotation {tag!r} at {t} s outside [{self.t0_s}, {end}] s")
        object.__setattr__(self, "data", freeze(data))
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "annotations", anns)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz

    @property
    def end_s(self) -> float:
        return self.t0_s + self.duration_s

    def times_s(self) -> np.ndarray:
        return self.t0_s + np.arange(self.n_samples) / self.rate_hz

    def channel_index(self, label: str) -> int:
        hits = [i for i, c in enumerate(self.channels) if c == label]
        if not hits:
            raise UnknownChannel(f"channel {label!r} not in {self.channels}")
        if len(hits) > 1:
            raise UnknownChannel(f"channel {label!r} is ambiguous in {self.channels}")
        return hits[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.rate_hz == other.rate_hz
            and self.channels == other.channels
            and self.t0_s == other.t0_s
            and self.annotations == other.annotations
            and self.units == other.units
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data, equal_nan=True)
        )


@dataclass(frozen=True)
class WindowPlan:
    """Frame layout of a sliding-window analysis over one series.

    frame i covers samples [i * hop_len, i * hop_len + window_len); the
    last frame always ends at or before the final sample.
    """

    window_s: float
    hop_s: float
    window_len: int
    hop_len: int
    frame_count: int

    def frame_start(self, i: int) -> int:
        return i * self.hop_len

    def frame_starts(self) -> np.ndarray:
        return np.arange(self.frame_count) * self.hop_len


def make_window_plan(series: TimeSeries, window_s: float, hop_s: float) -> WindowPlan:
    """Window/hop arithmetic for `series`: lengths round to the nearest sample.

    frame_count = floor((samples - window_len) / hop_len) + 1, or 0 when the
    series is shorter than one window.
    """
    if window_s <= 0 or hop_s <= 0:
        raise ValueError("window_s and hop_s must be positive")
    window_len = int(round(window_s * series.rate_hz))
    hop_len = int(round(hop_s * series.rate_hz))
    if window_len < 1:
        raise ZeroLengthWindow(f"window of {window_s} s rounds to 0 samples at {series.rate_hz} Hz")
    if hop_len < 1:
        raise ZeroLengthWindow(f"hop of {hop_s} s rounds to 0 samples at {series.rate_hz} Hz")
    n = series.n_samples
    frame_count = (n - window_len) // hop_len + 1 if n >= window_len else 0
    return WindowPlan(window_s, hop_s, window_len, hop_len, frame_count)


def trim_edges(series: TimeSeries, edge_s: float) -> TimeSeries:
    """Drop edge_s seconds from both ends; annotations keep absolute time."""
    if edge_s < 0:
        raise ValueError("edge_s must be non-negative")
    n_edge = int(round(edge_s * series.rate_hz))
    if n_edge == 0:
        return series
    if series.duration_s <= 2 * edge_s or series.n_samples - 2 * n_edge < 1:
        raise TooShort(
            f"cannot trim {edge_s} s per edge from a {series.duration_s} s series"
        )
    data = series.data[:, n_edge : series.n_samples - n_edge]
    t0 = series.t0_s + n_edge / series.rate_hz
    end = t0 + data.shape[1] / series.rate_hz
    anns = tuple(a for a in series.annotations if t0 <= a[0] <= end)
    return TimeSeries(series.rate_hz, series.channels, data, t0, anns, series.units)


def channel_mean(series: TimeSeries) -> TimeSeries:
    """Element-wise mean across channels; single-channel output labeled 'mean'."""
    data = series.data.mean(axis=0, keepdims=True)
    unit = series.units[0] if len(set(series.units)) == 1 else ""
    return TimeSeries(
        series.rate_hz, ("mean",), data, series.t0_s, series.annotations, (unit,)
    )


def select_channels(series: TimeSeries, labels) -> TimeSeries:
    """Reorder/subset channels; raises UnknownChannel for absent labels."""
    labels = tuple(labels)
    idx = [series.channel_index(label) for label in labels]
    data = series.data[idx, :]
    units = tuple(series.units[i] for i in idx)
    return TimeSeries(series.rate_hz, labels, data, series.t0_s, series.annotations, units)
