"""Synthetic fixtures: n-back schedules and EEG / gaze / pupil generators.

All generators run on numpy's 64-bit PCG64 generator seeded through
SeedSequence with explicit integer stream keys, one stream per component
phase and one per channel noise vector:

    phase of a component at f Hz  <- SeedSequence([seed, 0, round(f * 1000)])
    noise of channel c            <- SeedSequence([seed, 1, c])

Because a component's phase depends only on (seed, frequency), the
noiseless output of a multi-component spec equals the sum of its
single-component outputs at the same seed, and re-running any spec is
bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from . import config
from .errors import InfeasibleRate, NyquistViolation
from .gaze import TrajectoryPath, GazeTrace
from .signals import TimeSeries

_PHASE_STREAM = 0
_NOISE_STREAM = 1
_SCHEDULE_STREAM = 2


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, index])))


# --- n-back schedules ---------------------------------------------------------


@dataclass(frozen=True)
class NBackSchedule:
    """Digit n-back stimulus schedule with match flags and onset times.

    Stimulus i appears at i * (display_s + blank_s).  For n >= 1 position i
    is a match iff i >= n and stimuli[i] == stimuli[i - n]; for n = 0 every
    position is a match (respond to every stimulus).
    """

    n: int
    stimuli: tuple[int, ...]
    is_match: tuple[bool, ...]
    display_s: float = config.DEFAULTS.nback_display_s
    blank_s: float = config.DEFAULTS.nback_blank_s

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if len(self.stimuli) != len(self.is_match):
            raise ValueError("stimuli and is_match lengths differ")
        if any(not (0 <= d <= 9) for d in self.stimuli):
            raise ValueError("stimuli must be digits 0-9")
        expected = match_flags(self.n, self.stimuli)
        if tuple(self.is_match) != expected:
            raise ValueError("is_match is inconsistent with the n-back rule")

    @classmethod
    def from_stimuli(cls, n: int, stimuli, **kwargs) -> "NBackSchedule":
        stimuli = tuple(int(d) for d in stimuli)
        return cls(n, stimuli, match_flags(n, stimuli), **kwargs)

    @property
    def length(self) -> int:
        return len(self.stimuli)

    @property
    def onset_times_s(self) -> tuple[float, ...]:
        step = self.display_s + self.blank_s
        return tuple(i * step for i in range(self.length))

    @property
    def span_s(self) -> float:
        """Total trial time: every stimulus plus its blank."""
        return self.length * (self.display_s + self.blank_s)


def match_flags(n: int, stimuli) -> tuple[bool, ...]:
    """Match flags implied by the n-back rule for a digit sequence."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    stimuli = tuple(stimuli)
    if n == 0:
        return (True,) * len(stimuli)
    return tuple(
        i >= n and stimuli[i] == stimuli[i - n] for i in range(len(stimuli))
    )


def gen_nback_schedule(
    n: int,
    length: int,
    target_match_rate: float,
    seed: int,
    *,
    display_s: float = config.DEFAULTS.nback_display_s,
    blank_s: float = config.DEFAULTS.nback_blank_s,
) -> NBackSchedule:
    """Draw a schedule whose match rate approximates the target.

    Construction is rejection-free: for each position at or beyond n a
    match/non-match outcome is drawn from the target rate, then a digit is
    filled in consistently (the n-back digit for a match, one of the other
    nine otherwise).  For n = 0 every position is a match by the rule and
    the target rate is ignored.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not (0 <= target_match_rate <= 1):
        raise ValueError(f"target_match_rate must be in [0, 1], got {target_match_rate}")
    if n >= 1 and n >= length and target_match_rate > 0:
        raise InfeasibleRate(
            f"no position can match with n={n} and length={length}"
        )
    rng = _rng(seed, _SCHEDULE_STREAM, n)
    digits = []
    for i in range(length):
        if n == 0 or i < n:
            digits.append(int(rng.integers(0, 10)))
        elif rng.random() < target_match_rate:
            digits.append(digits[i - n])
        else:
            other = int(rng.integers(0, 9))
            if other >= digits[i - n]:
                other += 1
            digits.append(other)
    stimuli = tuple(digits)
    return NBackSchedule(n, stimuli, match_flags(n, stimuli), display_s, blank_s)


# --- declarative envelopes -------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Serializable amplitude envelope.

    kinds: const(value) | step(at_s, before, after) | interval(start_s,
    end_s, inside, outside) | ramp(start_s, end_s, v0, v1).
    """

    kind: str = "const"
    params: tuple[float, ...] = ()

    def __post_init__(self):
        arity = {"const": (0, 1), "step": (3, 3), "interval": (2, 4), "ramp": (4, 4)}
        if self.kind not in arity:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        lo, hi = arity[self.kind]
        if not (lo <= len(self.params) <= hi):
            raise ValueError(f"envelope {self.kind!r} takes {lo}..{hi} params")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            value = self.params[0] if self.params else 1.0
            return np.full_like(t, value)
        if self.kind == "step":
            at, before, after = self.params
            return np.where(t < at, before, after)
        if self.kind == "interval":
            start, end = self.params[0], self.params[1]
            inside = self.params[2] if len(self.params) > 2 else 1.0
            outside = self.params[3] if len(self.params) > 3 else 0.0
            return np.where((t >= start) & (t < end), inside, outside)
        start, end, v0, v1 = self.params
        u = np.clip((t - start) / (end - start), 0.0, 1.0)
        return v0 + (v1 - v0) * u


# --- generator specs ------------------------------------------------------------


@dataclass(frozen=True)
class EegComponent:
    """One sinusoidal source: freq, amplitude, per-channel mixing, envelope."""

    freq_hz: float
    amplitude: float = 1.0
    mixing: tuple[float, ...] | None = None
    envelope: Envelope = field(default_factory=Envelope)


@dataclass(frozen=True)
class SynthSpec:
    """Declarative recipe for one synthetic recording (kind eeg|gaze|pupil).

    Serializes to the flat key=value config format via to_text/from_text so
    fixtures stay reviewable.
    """

    kind: str
    duration_s: float
    rate_hz: float
    seed: int
    # eeg
    channels: tuple[str, ...] = ("C1",)
    components: tuple[EegComponent, ...] = ()
    noise_sigma: float = 0.0
    # gaze
    shape: str = "circle"
    speed_px_s: float = config.DEFAULTS.speed_slow_px_s
    noise_sigma_px: float = 0.0
    lag_ms: float = 0.0
    # pupil
    base_mm: float = 3.5
    gain_mm: float = 0.0
    noise_sigma_mm: float = 0.0
    envelope: Envelope = field(default_factory=Envelope)

    def __post_init__(self):
        if self.kind not in ("eeg", "gaze", "pupil"):
            raise ValueError(f"unknown spec kind {self.kind!r}")
        if self.duration_s <= 0 or self.rate_hz <= 0:
            raise ValueError("duration_s and rate_hz must be positive")

    def to_text(self) -> str:
        lines = [
            f"kind={self.kind}",
            f"duration_s={self.duration_s!r}",
            f"rate_hz={self.rate_hz!r}",
            f"seed={self.seed}",
        ]
        if self.kind == "eeg":
            lines.append("channels=" + ",".join(self.channels))
            lines.append(f"noise_sigma={self.noise_sigma!r}")
            for i, c in enumerate(self.components):
                lines.append(f"component.{i}.freq_hz={c.freq_hz!r}")
                lines.append(f"component.{i}.amplitude={c.amplitude!r}")
                if c.mixing is not None:
                    lines.append(
                        f"component.{i}.mixing=" + ",".join(repr(m) for m in c.mixing)
                    )
                lines.append(f"component.{i}.envelope={_envelope_text(c.envelope)}")
        elif self.kind == "gaze":
            lines += [
                f"shape={self.shape}",
                f"speed_px_s={self.speed_px_s!r}",
                f"noise_sigma_px={self.noise_sigma_px!r}",
                f"lag_ms={self.lag_ms!r}",
            ]
        else:
            lines += [
                f"base_mm={self.base_mm!r}",
                f"gain_mm={self.gain_mm!r}",
                f"noise_sigma_mm={self.noise_sigma_mm!r}",
                f"envelope={_envelope_text(self.envelope)}",
            ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SynthSpec":
        pairs: dict[str, str] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            pairs[key.strip()] = val.strip()
        kind = pairs.pop("kind")
        base = dict(
            kind=kind,
            duration_s=float(pairs.pop("duration_s")),
            rate_hz=float(pairs.pop("rate_hz")),
            seed=int(pairs.pop("seed")),
        )
        if kind == "eeg":
            base["channels"] = tuple(pairs.pop("channels").split(","))
            base["noise_sigma"] = float(pairs.pop("noise_sigma", "0"))
            comps = []
            i = 0
            while f"component.{i}.freq_hz" in pairs:
                mixing = pairs.pop(f"component.{i}.mixing", None)
                comps.append(
                    EegComponent(
                        freq_hz=float(pairs.pop(f"component.{i}.freq_hz")),
                        amplitude=float(pairs.pop(f"component.{i}.amplitude", "1")),
                        mixing=None if mixing is None else tuple(float(m) for m in mixing.split(",")),
                        envelope=_parse_envelope(pairs.pop(f"component.{i}.envelope", "const")),
                    )
                )
                i += 1
            base["components"] = tuple(comps)
        elif kind == "gaze":
            base["shape"] = pairs.pop("shape", "circle")
            base["speed_px_s"] = float(pairs.pop("speed_px_s", config.DEFAULTS.speed_slow_px_s))
            base["noise_sigma_px"] = float(pairs.pop("noise_sigma_px", "0"))
            base["lag_ms"] = float(pairs.pop("lag_ms", "0"))
        else:
            base["base_mm"] = float(pairs.pop("base_mm", "3.5"))
            base["gain_mm"] = float(pairs.pop("gain_mm", "0"))
            base["noise_sigma_mm"] = float(pairs.pop("noise_sigma_mm", "0"))
            base["envelope"] = _parse_envelope(pairs.pop("envelope", "const"))
        if pairs:
            raise ValueError(f"unknown spec keys: {sorted(pairs)}")
        return cls(**base)


def _envelope_text(env: Envelope) -> str:
    if not env.params:
        return env.kind
    return env.kind + ":" + ":".join(repr(p) for p in env.params)


def _parse_envelope(text: str) -> Envelope:
    parts = text.split(":")
    return Envelope(parts[0], tuple(float(p) for p in parts[1:]))


# --- signal generators -----------------------------------------------------------


def gen_eeg(spec: SynthSpec) -> TimeSeries:
    """Mixed sinusoids under amplitude envelopes plus white channel noise.

    data[c, k] = sum_j mixing_j[c] * amp_j * env_j(t_k) * sin(2 pi f_j t_k
    + phi_j) + noise_sigma * n_c[k], with phases and noise drawn from the
    per-component / per-channel streams documented in the module header.
    """
    if spec.kind != "eeg":
        raise ValueError(f"gen_eeg needs an eeg spec, got {spec.kind!r}")
    n = int(round(spec.duration_s * spec.rate_hz))
    n_ch = len(spec.channels)
    t = np.arange(n) / spec.rate_hz
    data = np.zeros((n_ch, n))
    for j, comp in enumerate(spec.components):
        if comp.freq_hz >= spec.rate_hz / 2:
            raise NyquistViolation(
                f"component at {comp.freq_hz} Hz >= Nyquist {spec.rate_hz / 2} Hz"
            )
        mixing = comp.mixing if comp.mixing is not None else (1.0,) * n_ch
        if len(mixing) != n_ch:
            raise ValueError(
                f"component {j} mixing has {len(mixing)} entries for {n_ch} channels"
            )
        phase = _rng(spec.seed, _PHASE_STREAM, int(round(comp.freq_hz * 1000))).uniform(0, 2 * np.pi)
        wave = comp.amplitude * comp.envelope(t) * np.sin(2 * np.pi * comp.freq_hz * t + phase)
        data += np.outer(np.asarray(mixing, dtype=float), wave)
    if spec.noise_sigma > 0:
        for c in range(n_ch):
            data[c] += spec.noise_sigma * _rng(spec.seed, _NOISE_STREAM, c).standard_normal(n)
    units = ("uV",) * n_ch
    return TimeSeries(spec.rate_hz, spec.channels, data, 0.0, (), units)


def gen_gaze(
    path: TrajectoryPath,
    noise_sigma_px: float,
    lag_ms: float = 0.0,
    seed: int = 0,
) -> GazeTrace:
    """Noisy tracker output for a displayed trajectory.

    gaze[k] = path[k - lag] + sigma * (gx, gy), lag rounded to samples and
    clamped at the first sample; x and y noise come from separate streams.
    All samples are flagged valid.
    """
    n = path.points.shape[0]
    lag = int(round(lag_ms / 1000.0 * path.rate_hz))
    src = np.maximum(np.arange(n) - lag, 0)
    pts = path.points[src].copy()
    if noise_sigma_px > 0:
        pts[:, 0] += noise_sigma_px * _rng(seed, _NOISE_STREAM, 0).standard_normal(n)
        pts[:, 1] += noise_sigma_px * _rng(seed, _NOISE_STREAM, 1).standard_normal(n)
    return GazeTrace(pts, path.rate_hz, np.ones(n, dtype=bool))


def gen_pupil(spec: SynthSpec) -> TimeSeries:
    """Pupil diameter course: base + gain * envelope(t) + noise, in mm."""
    if spec.kind != "pupil":
        raise ValueError(f"gen_pupil needs a pupil spec, got {spec.kind!r}")
    n = int(round(spec.duration_s * spec.rate_hz))
    t = np.arange(n) / spec.rate_hz
    diam = spec.base_mm + spec.gain_mm * spec.envelope(t)
    if spec.noise_sigma_mm > 0:
        diam = diam + spec.noise_sigma_mm * _rng(spec.seed, _NOISE_STREAM, 0).standard_normal(n)
    return TimeSeries(spec.rate_hz, ("pupil",), diam, 0.0, (), ("mm",))
