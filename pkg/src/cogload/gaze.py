"""Smooth-pursuit trajectories, gaze deviation features, and pupil windows.

A displayed trajectory is walked at constant speed along its arc length, so
cycles start and end on the same point.  Tracking quality is measured as
the per-sample Euclidean distance between gaze and target, normalized to
[0, 1], smoothed with a running mean, and cut to a fixed instance length
that classifiers can consume directly.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import config
from .errors import (
    EmptyAfterTrim,
    GeometryOverflow,
    LengthMismatch,
    NoValidSamples,
    TooShort,
)
from .signals import TimeSeries, freeze

SHAPES = ("rectangle", "circle", "sine")

# sine trajectory layout, as fractions of the screen
_SINE_AMPLITUDE_FRAC = 0.25  # of screen height
_SINE_SPAN_FRAC = 0.8  # of screen width
_SINE_PERIODS = 3  # oscillations per horizontal sweep
_RECT_FRAC = 0.6  # rectangle size as fraction of screen
_CIRCLE_FRAC = 0.3  # radius as fraction of the smaller screen dimension


@dataclass(frozen=True, eq=False)
class TrajectoryPath:
    """Displayed target positions, one (x, y) pixel pair per sample."""

    shape: str
    speed_px_s: float
    points: np.ndarray
    rate_hz: float
    screen: tuple[int, int]
    dot_diameter_px: float = config.DEFAULTS.dot_diameter_px
    cycle_s: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be n x 2, got {pts.shape}")
        object.__setattr__(self, "points", freeze(pts))
        object.__setattr__(self, "screen", (int(self.screen[0]), int(self.screen[1])))

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz


@dataclass(frozen=True, eq=False)
class GazeTrace:
    """Recorded gaze positions with per-sample validity flags."""

    points: np.ndarray
    rate_hz: float
    validity: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be n x 2, got {pts.shape}")
        valid = (
            np.ones(pts.shape[0], dtype=bool)
            if self.validity is None
            else np.asarray(self.validity, dtype=bool)
        )
        if valid.shape != (pts.shape[0],):
            raise ValueError("validity must have one flag per sample")
        valid = valid.copy()
        valid.flags.writeable = False
        object.__setattr__(self, "points", freeze(pts))
        object.__setattr__(self, "validity", valid)

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class PursuitInstance:
    """Fixed-length normalized deviation trace plus its labels.

    values lie in [0, 1]; adjustment records how the smoothed trace was
    fitted to the target length: ("exact" | "truncated" | "padded", count).
    """

    values: np.ndarray
    label: str
    person_id: str
    condition: str
    repetition_id: int
    adjustment: tuple[str, int] = ("exact", 0)
    norm_mode: str = "screen"
    norm_reference_px: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("instance values must be 1-d")
        if vals.size and (vals.min() < 0 or vals.max() > 1):
            raise ValueError("instance values must lie in [0, 1]")
        object.__setattr__(self, "values", freeze(vals))


def condition_name(shape: str, speed_px_s: float) -> str:
    """Canonical condition tag, e.g. 'circle-fast'."""
    if speed_px_s == config.DEFAULTS.speed_slow_px_s:
        return f"{shape}-slow"
    if speed_px_s == config.DEFAULTS.speed_fast_px_s:
        return f"{shape}-fast"
    return f"{shape}-{speed_px_s:g}"


def condition_parts(condition: str) -> tuple[str, float]:
    """Inverse of condition_name for the two named speeds."""
    shape, _, speed_name = condition.partition("-")
    speeds = {
        "slow": config.DEFAULTS.speed_slow_px_s,
        "fast": config.DEFAULTS.speed_fast_px_s,
    }
    if shape not in SHAPES or speed_name not in speeds:
        raise ValueError(f"condition must be <shape>-<slow|fast>, got {condition!r}")
    return shape, speeds[speed_name]


def figure_perimeter(
    shape: str,
    screen: tuple[int, int] = (config.DEFAULTS.screen_w_px, config.DEFAULTS.screen_h_px),
) -> float:
    """Arc length of one default-geometry cycle of a stimulus figure."""
    sw, sh = screen
    if shape == "rectangle":
        return 2.0 * (_RECT_FRAC * sw + _RECT_FRAC * sh)
    if shape == "circle":
        return float(2.0 * np.pi * _CIRCLE_FRAC * min(sw, sh))
    if shape == "sine":
        span = _SINE_SPAN_FRAC * sw
        amplitude = _SINE_AMPLITUDE_FRAC * sh
        return _sine_cycle(span, amplitude, _SINE_PERIODS, screen)[1]
    raise ValueError(f"shape must be one of {SHAPES}, got {shape!r}")


def _rect_cycle(size, screen):
    w, h = size
    cx, cy = screen[0] / 2, screen[1] / 2
    tl = (cx - w / 2, cy - h / 2)
    corners = np.array(
        [tl, (tl[0] + w, tl[1]), (tl[0] + w, tl[1] + h), (tl[0], tl[1] + h), tl]
    )
    seg = np.array([w, h, w, h], dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def pos(d):
        d = np.asarray(d, dtype=float)
        i = np.clip(np.searchsorted(cum, d, side="right") - 1, 0, 3)
        u = (d - cum[i]) / seg[i]
        a = corners[i]
        b = corners[i + 1]
        return a + (b - a) * u[:, None]

    return pos, float(cum[-1])


def _sine_cycle(span, amplitude, periods, screen):
    x0 = (screen[0] - span) / 2
    cy = screen[1] / 2
    # dense polyline over one left-right-left sweep, then walk by arc length
    m = 4096 * max(1, int(periods))
    u = np.linspace(0.0, 1.0, m)
    fwd = np.column_stack([x0 + u * span, cy + amplitude * np.sin(2 * np.pi * periods * u)])
    cycle = np.vstack([fwd, fwd[-2::-1]])
    seg = np.linalg.norm(np.diff(cycle, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def pos(d):
        d = np.asarray(d, dtype=float)
        x = np.interp(d, cum, cycle[:, 0])
        y = np.interp(d, cum, cycle[:, 1])
        return np.column_stack([x, y])

    return pos, float(cum[-1])


def gen_trajectory(
    shape: str,
    speed_px_s: float,
    duration_s: float,
    rate_hz: float = config.DEFAULTS.gaze_rate_hz,
    screen: tuple[int, int] = (config.DEFAULTS.screen_w_px, config.DEFAULTS.screen_h_px),
    *,
    rect_size: tuple[float, float] | None = None,
    circle_radius: float | None = None,
    sine_amplitude: float | None = None,
    sine_periods: int = _SINE_PERIODS,
    sine_span: float | None = None,
    dot_diameter_px: float = config.DEFAULTS.dot_diameter_px,
) -> TrajectoryPath:
    """Constant-speed walk of a rectangle, circle, or sine trace.

    The path is parameterized by arc length, so consecutive samples are
    speed_px_s / rate_hz apart along the figure and each full cycle closes
    on its start point.  Raises GeometryOverflow when the figure (plus the
    dot) does not fit on the screen.
    """
    if shape not in SHAPES:
        raise ValueError(f"shape must be one of {SHAPES}, got {shape!r}")
    if speed_px_s <= 0 or duration_s <= 0 or rate_hz <= 0:
        raise ValueError("speed_px_s, duration_s, and rate_hz must be positive")
    sw, sh = screen
    margin = dot_diameter_px / 2
    n = int(round(duration_s * rate_hz))
    if shape == "rectangle":
        size = rect_size if rect_size is not None else (_RECT_FRAC * sw, _RECT_FRAC * sh)
        if size[0] + 2 * margin > sw or size[1] + 2 * margin > sh:
            raise GeometryOverflow(f"rectangle {size} px does not fit on {screen} px")
        pos, perimeter = _rect_cycle(size, screen)
        d = np.mod(speed_px_s * np.arange(n) / rate_hz, perimeter)
        pts = pos(d)
    elif shape == "circle":
        r = circle_radius if circle_radius is not None else _CIRCLE_FRAC * min(sw, sh)
        if 2 * (r + margin) > min(sw, sh):
            raise GeometryOverflow(f"circle radius {r} px does not fit on {screen} px")
        perimeter = 2 * np.pi * r
        theta = speed_px_s * np.arange(n) / rate_hz / r
        pts = np.column_stack(
            [sw / 2 + r * np.cos(theta), sh / 2 + r * np.sin(theta)]
        )
    else:
        amplitude = sine_amplitude if sine_amplitude is not None else _SINE_AMPLITUDE_FRAC * sh
        span = sine_span if sine_span is not None else _SINE_SPAN_FRAC * sw
        if span + 2 * margin > sw or 2 * (amplitude + margin) > sh:
            raise GeometryOverflow(
                f"sine span {span} px / amplitude {amplitude} px does not fit on {screen} px"
            )
        pos, perimeter = _sine_cycle(span, amplitude, sine_periods, screen)
        d = np.mod(speed_px_s * np.arange(n) / rate_hz, perimeter)
        pts = pos(d)
    return TrajectoryPath(
        shape, speed_px_s, pts, rate_hz, (sw, sh), dot_diameter_px, perimeter / speed_px_s
    )


def pursuit_deviation(path: TrajectoryPath, gaze: GazeTrace) -> np.ndarray:
    """Per-sample Euclidean distance between gaze and target, in px."""
    if path.n_samples != gaze.n_samples:
        raise LengthMismatch(
            f"path has {path.n_samples} samples, gaze has {gaze.n_samples}"
        )
    if path.rate_hz != gaze.rate_hz:
        raise LengthMismatch(
            f"path at {path.rate_hz} Hz, gaze at {gaze.rate_hz} Hz"
        )
    dx = gaze.points[:, 0] - path.points[:, 0]
    dy = gaze.points[:, 1] - path.points[:, 1]
    return np.sqrt(dx * dx + dy * dy)


def normalize_deviation(devs: np.ndarray, mode: str = "per-trial-max") -> np.ndarray:
    """Scale deviations into [0, 1] by the trial's own maximum.

    A zero maximum (perfect tracking) maps to all zeros.
    """
    if mode != "per-trial-max":
        raise ValueError(f"unknown normalization mode {mode!r}")
    devs = np.asarray(devs, dtype=float)
    if devs.size == 0:
        raise TooShort("cannot normalize an empty deviation series")
    peak = devs.max()
    if peak == 0:
        return np.zeros_like(devs)
    return devs / peak


def smooth_running_mean(
    values: np.ndarray,
    window: int = config.DEFAULTS.smooth_window_samples,
    hop: int = config.DEFAULTS.smooth_hop_samples,
) -> np.ndarray:
    """Running mean over `window` samples advancing by `hop`.

    Output sample i is the mean of values[i*hop : i*hop + window]; with
    hop 1 the output length is n - window + 1.
    """
    values = np.asarray(values, dtype=float)
    if window < 1 or hop < 1:
        raise ValueError("window and hop must be >= 1")
    if values.size < window:
        raise TooShort(f"{values.size} samples < window of {window}")
    csum = np.concatenate([[0.0], np.cumsum(values)])
    means = (csum[window:] - csum[:-window]) / window
    return means[::hop] if hop > 1 else means


def build_pursuit_instance(
    path: TrajectoryPath,
    gaze: GazeTrace,
    *,
    label: str,
    person_id: str,
    condition: str | None = None,
    repetition_id: int = 0,
    drop_head_s: float = config.DEFAULTS.drop_head_s,
    target_len: int = config.DEFAULTS.instance_len,
    smooth_window: int = config.DEFAULTS.smooth_window_samples,
    smooth_hop: int = config.DEFAULTS.smooth_hop_samples,
    norm_mode: str = "screen",
) -> PursuitInstance:
    """Full instance chain: drop head, deviate, normalize, smooth, fit length.

    norm_mode "screen" divides by the screen diagonal (the largest possible
    on-screen deviation, a per-trial constant), which keeps instances
    comparable across trials and preserves ordering by tracking noise.
    norm_mode "trial-max" divides by the trial's own maximum instead.
    Traces longer than target_len are truncated, shorter ones are padded
    with their final value; the adjustment is recorded on the instance.
    """
    devs = pursuit_deviation(path, gaze)
    k0 = int(round(drop_head_s * path.rate_hz))
    if k0 >= devs.size:
        raise EmptyAfterTrim(
            f"dropping {drop_head_s} s leaves no samples of {devs.size}"
        )
    devs = devs[k0:]
    if norm_mode == "screen":
        reference = float(np.hypot(path.screen[0], path.screen[1]))
        vals = np.minimum(devs / reference, 1.0)
    elif norm_mode == "trial-max":
        reference = float(devs.max())
        vals = normalize_deviation(devs)
    else:
        raise ValueError(f"unknown norm_mode {norm_mode!r}")
    smoothed = smooth_running_mean(vals, smooth_window, smooth_hop)
    if smoothed.size > target_len:
        adjustment = ("truncated", int(smoothed.size - target_len))
        smoothed = smoothed[:target_len]
    elif smoothed.size < target_len:
        adjustment = ("padded", int(target_len - smoothed.size))
        smoothed = np.concatenate(
            [smoothed, np.full(target_len - smoothed.size, smoothed[-1])]
        )
    else:
        adjustment = ("exact", 0)
    if condition is None:
        condition = condition_name(path.shape, path.speed_px_s)
    return PursuitInstance(
        smoothed,
        str(label),
        str(person_id),
        condition,
        int(repetition_id),
        adjustment,
        norm_mode,
        reference,
    )


def pupil_window_feature(
    diam: TimeSeries, window_s: float = config.DEFAULTS.pupil_window_s
) -> np.ndarray:
    """Mean pupil diameter over consecutive non-overlapping windows.

    NaN samples count as invalid and are excluded from each mean; a window
    with no valid sample raises NoValidSamples with its index.  Trailing
    samples that do not fill a window are ignored.
    """
    if diam.n_channels != 1:
        raise ValueError(f"pupil series must be single-channel, got {diam.n_channels}")
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    wlen = int(round(window_s * diam.rate_hz))
    if wlen < 1:
        raise ValueError(f"window of {window_s} s rounds to 0 samples")
    n_win = diam.n_samples // wlen
    if n_win < 1:
        raise TooShort(f"{diam.n_samples} samples < one window of {wlen}")
    x = diam.data[0]
    means = np.empty(n_win)
    for i in range(n_win):
        chunk = x[i * wlen : (i + 1) * wlen]
        valid = chunk[~np.isnan(chunk)]
        if valid.size == 0:
            raise NoValidSamples(i)
        means[i] = valid.mean()
    return means
