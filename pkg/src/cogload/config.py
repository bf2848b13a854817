"""Run configuration: every protocol constant lives here, exactly once.

Pipelines take these values as keyword defaults, so a study can override any
of them per call, per config file, or per CLI flag.  Precedence when
resolving a run: CLI flag > config file > RunConfig default.

Config files are flat key=value text, one pair per line, '#' comments:

    window_s=1.0
    blink_threshold_uv=200
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

# Electrode groups used by the EEG pipelines.
OCCIPITAL_ELECTRODES = ("Pz", "P3", "P7", "O1", "Oz", "O2", "P4", "P8")
FRONTAL_ELECTRODES = ("Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8")

# Fold counts for the leave-one-repetition-out scheme, per pursuit condition.
REPETITION_FOLDS = {
    ("rectangle", "slow"): 2,
    ("rectangle", "fast"): 3,
    ("circle", "slow"): 5,
    ("circle", "fast"): 7,
    ("sine", "slow"): 2,
    ("sine", "fast"): 3,
}


@dataclass(frozen=True)
class RunConfig:
    """Defaults for the full sensing pipeline."""

    # spectral framing
    window_s: float = 1.0
    hop_s: float = 0.5
    edge_trim_s: float = 4.0
    # broadband prefilter applied before EEG power courses
    broadband_low_hz: float = 0.5
    broadband_high_hz: float = 20.0
    # individual alpha frequency detection
    iaf_search_low_hz: float = 6.0
    iaf_search_high_hz: float = 14.0
    alpha_half_width_hz: float = 2.0
    # theta band (center 5 Hz, +/- 2 Hz)
    theta_center_hz: float = 5.0
    theta_half_width_hz: float = 2.0
    # spatio-spectral decomposition
    ssd_flank_hz: float = 2.0
    ssd_gap_hz: float = 1.0
    ssd_shrinkage: float = 0.05
    # blink detection on Fp1/Fp2
    blink_threshold_uv: float = 200.0
    blink_refractory_s: float = 0.2
    # smooth pursuit
    screen_w_px: int = 1680
    screen_h_px: int = 1050
    dot_diameter_px: float = 10.0
    speed_slow_px_s: float = 450.0
    speed_fast_px_s: float = 650.0
    gaze_rate_hz: float = 250.0
    drop_head_s: float = 2.0
    smooth_window_samples: int = 250
    smooth_hop_samples: int = 1
    instance_len: int = 6000
    # pupillometry
    pupil_window_s: float = 5.0
    # classifier
    svm_c: float = 1.0
    svm_epochs: int = 200
    # n-back schedule timing
    nback_display_s: float = 1.0
    nback_blank_s: float = 2.5
    # streaming
    buffer_capacity_s: float = 60.0
    # reproducibility
    seed: int = 0

    @property
    def theta_low_hz(self) -> float:
        return self.theta_center_hz - self.theta_half_width_hz

    @property
    def theta_high_hz(self) -> float:
        return self.theta_center_hz + self.theta_half_width_hz

    @property
    def screen_px(self) -> tuple[int, int]:
        return (self.screen_w_px, self.screen_h_px)


DEFAULTS = RunConfig()

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELD_TYPES:
        raise KeyError(f"unknown config key: {name}")
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Parse flat key=value config text into a dict of typed values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = _coerce(key.strip(), raw.strip())
    return values


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve a RunConfig from defaults, an optional file, and overrides.

    `overrides` wins over the file, the file wins over defaults.  Override
    values of None are ignored so absent CLI flags fall through.
    """
    values: dict = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_TYPES:
            raise KeyError(f"unknown config key: {key}")
        values[key] = _coerce(key, str(val)) if isinstance(val, str) else val
    return dataclasses.replace(DEFAULTS, **values)


def config_to_text(cfg: RunConfig) -> str:
    lines = [f"{f.name}={getattr(cfg, f.name)!r}".replace("'", "") for f in dataclasses.fields(RunConfig)]
    return "\n".join(lines) + "\n"
