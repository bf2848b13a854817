"""Recording files: a small CSV dialect with a '#' header block.

Layout::

    # cogload-recording v1
    # rate_hz=250.0
    # t0_s=0.0
    # channels=Fp1:uV,Fp2:uV
    time_s,Fp1,Fp2
    0.0,12.5,-3.75

Floats are printed with repr (shortest round-trip form), so save/load is
bit-exact.  Annotations live in a companion file named
<stem>.annotations.csv with columns time_s,tag.  Timestamps must follow the
declared rate within half a sample; larger jitter (including duplicated
rows) raises RateJitter naming the first offending data row.
"""

from __future__ import annotations

import csv
import io
import warnings
from pathlib import Path
import numpy as np

from ._fs import atomic_write_text
from .errors import ParseError, RateJitter, UnknownUnitWarning
from .learn import FeatureDataset
from .signals import TimeSeries

MAGIC = "cogload-recording v1"
KNOWN_UNITS = ("uV", "mm", "px", "")


def annotations_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".annotations.csv")


def save_recording(series: TimeSeries, path: str | Path) -> Path:
    """Write a recording (and its annotations companion when present)."""
    path = Path(path)
    for label, unit in zip(series.channels, series.units):
        if "," in label or ":" in label or "," in unit or ":" in unit:
            raise ValueError(f"channel {label!r} ({unit!r}): ',' and ':' are reserved")
    out = io.StringIO()
    out.write(f"# {MAGIC}\n")
    out.write(f"# rate_hz={series.rate_hz!r}\n")
    out.write(f"# t0_s={series.t0_s!r}\n")
    out.write("# channels=" + ",".join(f"{c}:{u}" for c, u in zip(series.channels, series.units)) + "\n")
    out.write("time_s," + ",".join(series.channels) + "\n")
    for k in range(series.n_samples):
        t = series.t0_s + k / series.rate_hz
        out.write(repr(t) + "," + ",".join(repr(float(v)) for v in series.data[:, k]) + "\n")
    atomic_write_text(path, out.getvalue())
    if series.annotations:
        ann = "time_s,tag\n" + "".join(f"{t!r},{tag}\n" for t, tag in series.annotations)
        atomic_write_text(annotations_path(path), ann)
    return path


def load_recording(path: str | Path) -> TimeSeries:
    """Parse a recording file; merges the annotations companion if present."""
    path = Path(path)
    rate_hz = None
    t0_s = 0.0
    channels: list[str] = []
    units: list[str] = []
    rows: list[list[float]] = []
    times: list[float] = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    data_header_seen = False
    data_row = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body == MAGIC:
                continue
            key, sep, val = body.partition("=")
            if not sep:
                raise ParseError(lineno, f"malformed header line {line!r}")
            key = key.strip()
            if key == "rate_hz":
                try:
                    rate_hz = float(val)
                except ValueError:
                    raise ParseError(lineno, f"bad rate_hz {val!r}") from None
            elif key == "t0_s":
                try:
                    t0_s = float(val)
                except ValueError:
                    raise ParseError(lineno, f"bad t0_s {val!r}") from None
            elif key == "channels":
                for part in val.split(","):
                    name, sep2, unit = part.partition(":")
                    if not name:
                        raise ParseError(lineno, f"empty channel name in {val!r}")
                    channels.append(name)
                    units.append(unit if sep2 else "")
            else:
                raise ParseError(lineno, f"unknown header key {key!r}")
            continue
        if not data_header_seen:
            expected = "time_s," + ",".join(channels)
            if line != expected:
                raise ParseError(lineno, f"expected column header {expected!r}, got {line!r}")
            if rate_hz is None:
                raise ParseError(lineno, "missing rate_hz header")
            data_header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != len(channels) + 1:
            raise ParseError(
                lineno, f"expected {len(channels) + 1} columns, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        expected_t = t0_s + data_row / rate_hz
        if abs(values[0] - expected_t) > 0.5 / rate_hz:
            raise RateJitter(
                data_row,
                f"data row {data_row}: timestamp {values[0]} deviates from "
                f"{expected_t} by more than half a sample",
            )
        times.append(values[0])
        rows.append(values[1:])
        data_row += 1
    if not data_header_seen:
        raise ParseError(len(lines), "no column header found")
    for name, unit in zip(channels, units):
        if unit not in KNOWN_UNITS:
            warnings.warn(
                f"channel {name!r} declares unknown unit {unit!r}", UnknownUnitWarning
            )
    data = np.array(rows, dtype=float).T if rows else np.empty((len(channels), 0))
    annotations: tuple = ()
    ann_path = annotations_path(path)
    if ann_path.exists():
        annotations = _load_annotations(ann_path)
    return TimeSeries(rate_hz, tuple(channels), data, t0_s, annotations, tuple(units))


def _load_annotations(path: Path) -> tuple:
    out = []
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["time_s", "tag"]:
            raise ParseError(1, f"annotation header must be time_s,tag, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(lineno, f"expected 2 columns, got {len(row)}")
            try:
                out.append((float(row[0]), row[1]))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
    return tuple(out)


# --- feature dataset CSV --------------------------------------------------------


def save_dataset(ds: FeatureDataset, path: str | Path) -> Path:
    """Instance-per-row CSV: person, condition, repetition, label, attributes."""
    out = io.StringIO()
    cols = [f"v{i}" for i in range(ds.dim)]
    out.write("person_id,condition,repetition_id,label," + ",".join(cols) + "\n")
    for i in range(ds.n):
        out.write(
            f"{ds.person_ids[i]},{ds.conditions[i]},{ds.repetition_ids[i]},{ds.y[i]},"
            + ",".join(repr(float(v)) for v in ds.X[i])
            + "\n"
        )
    return atomic_write_text(path, out.getvalue())


def load_dataset(path: str | Path) -> FeatureDataset:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:4] != ["person_id", "condition", "repetition_id", "label"]:
            raise ParseError(1, "dataset header must start with person_id,condition,repetition_id,label")
        X, y, persons, conditions, reps = [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(lineno, f"expected {len(header)} columns, got {len(row)}")
            persons.append(row[0])
            conditions.append(row[1])
            try:
                reps.append(int(row[2]))
                X.append([float(v) for v in row[4:]])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            y.append(row[3])
    return FeatureDataset(np.array(X, dtype=float), tuple(y), tuple(persons), tuple(conditions), tuple(reps))
