"""Real-time windowed classification and adaptive difficulty control.

A StreamSession owns a single mutable sample buffer; all other toolkit
values stay immutable.  Callers push chunks of any size and the session
emits one decision per completed analysis window, exactly once, anchored
at the session start.  Because features are computed from the same sample
values a batch pass would see, any partitioning of a recording into push
calls yields bit-identical decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import numpy as np

from . import config
from .errors import BufferOverflow, ChannelMismatch, LengthMismatch, NoValidSamples
from .gaze import TrajectoryPath
from .learn import LinearModel, predict
from .signals import TimeSeries, make_window_plan
from .spectral import BandSpec, band_power, stft_power

PIPELINES = ("iaf-course", "pupil-window", "pursuit-deviation")
DIFFICULTIES = ("easy", "difficult")


def window_feature(session: "StreamSession", window: np.ndarray, start: int) -> np.ndarray:
    """Feature vector of one complete window, shared by push and batch paths.

    iaf-course: band power of the window per channel, averaged across
    channels.  pupil-window: mean of the valid (non-NaN) samples.
    pursuit-deviation: mean Euclidean distance to the reference trajectory
    over the window's absolute sample range.
    """
    if session.pipeline == "pupil-window":
        chunk = window[0]
        valid = chunk[~np.isnan(chunk)]
        if valid.size == 0:
            raise NoValidSamples(start // session.hop_len)
        return np.array([valid.mean()])
    if session.pipeline == "iaf-course":
        powers = []
        for c in range(window.shape[0]):
            one = TimeSeries(session.rate_hz, ("w",), window[c : c + 1])
            plan = make_window_plan(one, session.window_len / session.rate_hz, session.window_len / session.rate_hz)
            powers.append(band_power(stft_power(one, plan), session.band)[0])
        return np.array([float(np.mean(powers))])
    path = session.reference
    end = start + window.shape[1]
    if end > path.n_samples:
        raise LengthMismatch(
            f"reference trajectory has {path.n_samples} samples, window ends at {end}"
        )
    ref = path.points[start:end]
    dx = window[0] - ref[:, 0]
    dy = window[1] - ref[:, 1]
    return np.array([float(np.mean(np.sqrt(dx * dx + dy * dy)))])


@dataclass(frozen=True)
class Decision:
    """One classified window: [start_s, end_s) -> label."""

    start_s: float
    end_s: float
    label: str
    feature: tuple[float, ...]


@dataclass(frozen=True)
class DifficultyCommand:
    """Difficulty change taking effect at the next task boundary."""

    at_time_s: float
    new_difficulty: str
    triggering_label: str


@dataclass
class StreamSession:
    """Mutable single-owner state of one streaming run.

    Use make_session() to construct; push(), adapt_difficulty(), and
    session_report() are the only operations that touch the state.
    """

    pipeline: str
    model: LinearModel
    rate_hz: float
    channels: tuple[str, ...]
    window_len: int
    hop_len: int
    band: BandSpec | None
    reference: TrajectoryPath | None
    capacity: int
    task_boundary_s: float | None
    difficulty: str
    initial_difficulty: str
    decisions: list[Decision] = field(default_factory=list)
    commands: list[DifficultyCommand] = field(default_factory=list)
    samples_received: int = 0
    _buffer: np.ndarray = None
    _buffer_start: int = 0  # absolute index of _buffer[:, 0]
    _next_window_start: int = 0

    @property
    def window_s(self) -> float:
        return self.window_len / self.rate_hz

    @property
    def hop_s(self) -> float:
        return self.hop_len / self.rate_hz


def make_session(
    pipeline: str,
    model: LinearModel,
    rate_hz: float,
    channels,
    *,
    window_s: float,
    hop_s: float | None = None,
    band: BandSpec | None = None,
    reference: TrajectoryPath | None = None,
    buffer_capacity_s: float = config.DEFAULTS.buffer_capacity_s,
    task_boundary_s: float | None = None,
    initial_difficulty: str = "easy",
) -> StreamSession:
    """Configure a streaming session; hop defaults to the window length."""
    if pipeline not in PIPELINES:
        raise ValueError(f"pipeline must be one of {PIPELINES}, got {pipeline!r}")
    if initial_difficulty not in DIFFICULTIES:
        raise ValueError(f"difficulty must be one of {DIFFICULTIES}")
    if pipeline == "iaf-course" and band is None:
        raise ValueError("iaf-course pipeline needs a band")
    if pipeline == "pursuit-deviation" and reference is None:
        raise ValueError("pursuit-deviation pipeline needs a reference trajectory")
    channels = tuple(channels)
    window_len = int(round(window_s * rate_hz))
    hop_len = window_len if hop_s is None else int(round(hop_s * rate_hz))
    if window_len < 1 or hop_len < 1:
        raise ValueError("window and hop must round to at least one sample")
    capacity = int(round(buffer_capacity_s * rate_hz))
    session = StreamSession(
        pipeline=pipeline,
        model=model,
        rate_hz=rate_hz,
        channels=channels,
        window_len=window_len,
        hop_len=hop_len,
        band=band,
        reference=reference,
        capacity=capacity,
        task_boundary_s=task_boundary_s,
        difficulty=initial_difficulty,
        initial_difficulty=initial_difficulty,
    )
    session._buffer = np.empty((len(channels), 0))
    return session


def _coerce_chunk(session: StreamSession, samples) -> np.ndarray:
    if isinstance(samples, TimeSeries):
        if samples.channels != session.channels:
            raise ChannelMismatch(
                f"session channels {session.channels}, pushed {samples.channels}"
            )
        if samples.rate_hz != session.rate_hz:
            raise ChannelMismatch(
                f"session rate {session.rate_hz} Hz, pushed {samples.rate_hz} Hz"
            )
        return np.asarray(samples.data, dtype=float)
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] != len(session.channels):
        raise ChannelMismatch(
            f"expected {len(session.channels)} channel rows, got shape {arr.shape}"
        )
    return arr


def push(session: StreamSession, samples) -> list[Decision]:
    """Ingest a chunk and classify every newly completed window.

    Returns the decisions emitted by this call, in time order.  Samples a
    window still needs stay buffered; exceeding the configured capacity
    raises BufferOverflow rather than dropping anything.
    """
    chunk = _coerce_chunk(session, samples)
    session._buffer = np.concatenate([session._buffer, chunk], axis=1)
    session.samples_received += chunk.shape[1]
    new_decisions: list[Decision] = []
    while session._next_window_start + session.window_len <= session.samples_received:
        start = session._next_window_start
        offset = start - session._buffer_start
        window = np.ascontiguousarray(
            session._buffer[:, offset : offset + session.window_len]
        )
        feature = window_feature(session, window, start)
        label = predict(session.model, feature)
        decision = Decision(
            start_s=start / session.rate_hz,
            end_s=(start + session.window_len) / session.rate_hz,
            label=str(label),
            feature=tuple(float(v) for v in feature),
        )
        session.decisions.append(decision)
        new_decisions.append(decision)
        session._next_window_start += session.hop_len
    # drop samples no window will read again
    drop = session._next_window_start - session._buffer_start
    if drop > 0:
        session._buffer = session._buffer[:, drop:]
        session._buffer_start += drop
    retained = session._buffer.shape[1]
    if retained > session.capacity:
        raise BufferOverflow(session.capacity)
    return new_decisions


def batch_decisions(session_template: StreamSession, series: TimeSeries) -> list[Decision]:
    """Offline evaluation of a whole recording under a session's settings.

    Slices the recording into the same windows a stream would form and runs
    the same feature and prediction path, without any session state.
    """
    chunk = _coerce_chunk(session_template, series)
    n = chunk.shape[1]
    out: list[Decision] = []
    start = 0
    while start + session_template.window_len <= n:
        window = np.ascontiguousarray(chunk[:, start : start + session_template.window_len])
        feature = window_feature(session_template, window, start)
        label = predict(session_template.model, feature)
        out.append(
            Decision(
                start_s=start / session_template.rate_hz,
                end_s=(start + session_template.window_len) / session_template.rate_hz,
                label=str(label),
                feature=tuple(float(v) for v in feature),
            )
        )
        start += session_template.hop_len
    return out


def adapt_difficulty(session: StreamSession, decision: Decision) -> DifficultyCommand | None:
    """Flip task difficulty against the sensed workload.

    A high-workload decision requests the easy variant and a low-workload
    decision the difficult one; nothing is emitted when the session is
    already at the target, so two consecutive commands never share a
    direction.  The command takes effect at the next task boundary (the
    decision time itself when no boundary grid is configured).
    """
    label = decision.label
    if label not in ("low", "high"):
        raise ValueError(f"adaptive control expects low/high labels, got {label!r}")
    target = "easy" if label == "high" else "difficult"
    if target == session.difficulty:
        return None
    if session.task_boundary_s:
        period = session.task_boundary_s
        at = math.ceil(decision.end_s / period - 1e-12) * period
    else:
        at = decision.end_s
    command = DifficultyCommand(float(at), target, label)
    session.difficulty = target
    session.commands.append(command)
    return command


def session_report(session: StreamSession) -> dict:
    """JSON-ready record sufficient to re-derive every decision offline."""
    return {
        "format": "cogload-session",
        "version": 1,
        "pipeline": session.pipeline,
        "rate_hz": session.rate_hz,
        "channels": list(session.channels),
        "window_s": session.window_s,
        "hop_s": session.hop_s,
        "band": None
        if session.band is None
        else {
            "center_hz": session.band.center_hz,
            "low_hz": session.band.low_hz,
            "high_hz": session.band.high_hz,
        },
        "initial_difficulty": session.initial_difficulty,
        "final_difficulty": session.difficulty,
        "samples_received": session.samples_received,
        "windows_emitted": len(session.decisions),
        "difficulty_switches": len(session.commands),
        "decisions": [
            {
                "start_s": d.start_s,
                "end_s": d.end_s,
                "label": d.label,
                "feature": list(d.feature),
            }
            for d in session.decisions
        ],
        "commands": [
            {
                "at_time_s": c.at_time_s,
                "new_difficulty": c.new_difficulty,
                "triggering_label": c.triggering_label,
            }
            for c in session.commands
        ],
    }
