"""Command-line surface: reproducible pipeline runs over recording files.

Every subcommand resolves its settings as CLI flag > config file > default,
writes its artifacts atomically into --out, and drops a
<command>.manifest.json beside them recording the tool version, resolved
parameters, full configuration, and sha256 digests of every input and
output.  Re-running a command with the manifest's parameters reproduces
the output digests exactly.

Exit codes: 0 success, 1 pipeline error (a one-line JSON error record goes
to stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path
import numpy as np

from . import __version__, config
from ._fs import atomic_write_text, sha256_file
from .eeg import band_course, count_blinks
from .errors import CogloadError, ParseError
from .gaze import (
    GazeTrace,
    TrajectoryPath,
    build_pursuit_instance,
    condition_parts,
    figure_perimeter,
    gen_trajectory,
    pupil_window_feature,
)
from .learn import (
    FeatureDataset,
    leave_one_person_out,
    fit_linear_regression,
    load_model,
    lopo_regression,
    metrics_table,
    per_condition_reports,
    regression_table,
    repetition_fold_count,
    save_model,
    train_linear_svm,
)
from .recio import load_dataset, load_recording, save_dataset, save_recording
from .signals import TimeSeries
from .spectral import BandSpec, detect_iaf
from .stream import adapt_difficulty, make_session, push, session_report
from .synth import Envelope, EegComponent, SynthSpec, gen_eeg, gen_gaze, gen_pupil


def _parse_band(text: str) -> BandSpec:
    low, sep, high = text.partition(":")
    if not sep:
        raise ValueError(f"band must be LOW:HIGH in Hz, got {text!r}")
    lo, hi = float(low), float(high)
    return BandSpec((lo + hi) / 2, lo, hi)


def _resolve_config(args) -> config.RunConfig:
    overrides = {}
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"--set needs KEY=VALUE, got {item!r}")
        overrides[key.strip()] = val.strip()
    return config.load_config(args.config, overrides)


class _Run:
    """Bookkeeping for one command: digests in, artifacts out, manifest last."""

    def __init__(self, command: str, args, cfg: config.RunConfig):
        self.command = command
        self.out_dir = Path(args.out)
        self.cfg = cfg
        self.params: dict = {}
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}

    def read_input(self, path: str | Path) -> Path:
        path = Path(path)
        self.inputs[str(path)] = "sha256:" + sha256_file(path)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = atomic_write_text(self.out_dir / name, text)
        self.outputs[name] = "sha256:" + sha256_file(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def write_recording(self, name: str, series: TimeSeries) -> Path:
        path = save_recording(series, self.out_dir / name)
        self.outputs[name] = "sha256:" + sha256_file(path)
        return path

    def note_output(self, name: str) -> None:
        self.outputs[name] = "sha256:" + sha256_file(self.out_dir / name)

    def finish(self) -> None:
        manifest = {
            "format": "cogload-manifest",
            "version": 1,
            "tool": f"cogload {__version__}",
            "command": self.command,
            "params": self.params,
            "config": dataclasses.asdict(self.cfg),
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        atomic_write_text(
            self.out_dir / f"{self.command}.manifest.json",
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )


def _gaze_recording(trace: GazeTrace, rate_hz: float) -> TimeSeries:
    return TimeSeries(rate_hz, ("x", "y"), trace.points.T.copy(), 0.0, (), ("px", "px"))


def _path_recording(path: TrajectoryPath) -> TimeSeries:
    return TimeSeries(path.rate_hz, ("x", "y"), path.points.T.copy(), 0.0, (), ("px", "px"))


def _path_from_recording(series: TimeSeries, condition: str, cfg: config.RunConfig) -> TrajectoryPath:
    shape, speed = condition_parts(condition)
    cycle_s = figure_perimeter(shape, cfg.screen_px) / speed
    return TrajectoryPath(
        shape,
        speed,
        series.data.T.copy(),
        series.rate_hz,
        cfg.screen_px,
        cfg.dot_diameter_px,
        cycle_s,
    )


# --- synth ----------------------------------------------------------------------


def _synth_from_spec(run: _Run, spec_path: Path) -> None:
    spec = SynthSpec.from_text(run.read_input(spec_path).read_text())
    stem = spec_path.stem
    if spec.kind == "eeg":
        run.write_recording(f"{stem}.csv", gen_eeg(spec))
    elif spec.kind == "pupil":
        run.write_recording(f"{stem}.csv", gen_pupil(spec))
    else:
        path = gen_trajectory(
            spec.shape,
            spec.speed_px_s,
            spec.duration_s,
            spec.rate_hz,
            run.cfg.screen_px,
            dot_diameter_px=run.cfg.dot_diameter_px,
        )
        trace = gen_gaze(path, spec.noise_sigma_px, spec.lag_ms, spec.seed)
        run.write_recording(f"{stem}.path.csv", _path_recording(path))
        run.write_recording(f"{stem}.csv", _gaze_recording(trace, spec.rate_hz))
    print(f"wrote {spec.kind} fixture(s) for {spec_path} into {run.out_dir}")


def _synth_iaf_pair(run: _Run, seed: int) -> None:
    base = dict(duration_s=30.0, rate_hz=250.0, channels=("Oz",), noise_sigma=1.0)
    open_spec = SynthSpec(kind="eeg", seed=seed, **base)
    closed_spec = SynthSpec(
        kind="eeg",
        seed=seed + 1,
        components=(EegComponent(freq_hz=10.0, amplitude=2.0),),
        **base,
    )
    for name, spec in (("eyes-open", open_spec), ("eyes-closed", closed_spec)):
        run.write_text(f"{name}.spec.txt", spec.to_text())
        run.write_recording(f"{name}.csv", gen_eeg(spec))
    print(f"wrote eyes-open/eyes-closed pair into {run.out_dir}")


def _synth_pupil_step(run: _Run, seed: int, persons: int) -> None:
    cfg = run.cfg
    step_at, duration, rate = 20.0, 60.0, 60.0
    X, y, ids = [], [], []
    for p in range(persons):
        person = f"P{p + 1:02d}"
        spec = SynthSpec(
            kind="pupil",
            duration_s=duration,
            rate_hz=rate,
            seed=seed + p,
            base_mm=3.5,
            gain_mm=0.3,
            noise_sigma_mm=0.05,
            envelope=Envelope("step", (step_at, 0.0, 1.0)),
        )
        series = gen_pupil(spec)
        run.write_text(f"pupil-{person}.spec.txt", spec.to_text())
        run.write_recording(f"pupil-{person}.csv", series)
        means = pupil_window_feature(series, cfg.pupil_window_s)
        for i, mean in enumerate(means):
            X.append([mean])
            y.append("high" if i * cfg.pupil_window_s >= step_at else "low")
            ids.append(person)
    ds = FeatureDataset(np.array(X), tuple(y), tuple(ids))
    save_dataset(ds, run.out_dir / "pupil-windows.csv")
    run.note_output("pupil-windows.csv")
    print(f"wrote {persons} pupil recordings and {ds.n} window rows into {run.out_dir}")


def _synth_pursuit_set(run: _Run, args, seed: int) -> None:
    cfg = run.cfg
    conditions = [c.strip() for c in args.conditions.split(",") if c.strip()]
    index = io.StringIO()
    index.write("person_id,condition,repetition_id,label,path_file,gaze_file\n")
    trial = 0
    for condition in conditions:
        shape, speed = condition_parts(condition)
        path = gen_trajectory(
            shape,
            speed,
            args.trial_s,
            cfg.gaze_rate_hz,
            cfg.screen_px,
            dot_diameter_px=cfg.dot_diameter_px,
        )
        path_file = f"path-{condition}.csv"
        run.write_recording(path_file, _path_recording(path))
        reps = repetition_fold_count(condition)
        for p in range(args.persons):
            person = f"P{p + 1:02d}"
            for rep in range(reps):
                for label, sigma in (("low", args.sigma_low), ("high", args.sigma_high)):
                    trace = gen_gaze(path, sigma, 0.0, seed=seed + trial)
                    trial += 1
                    gaze_file = f"gaze-{person}-{condition}-r{rep}-{label}.csv"
                    run.write_recording(gaze_file, _gaze_recording(trace, cfg.gaze_rate_hz))
                    index.write(
                        f"{person},{condition},{rep},{label},{path_file},{gaze_file}\n"
                    )
    run.write_text("index.csv", index.getvalue())
    print(f"wrote {trial} pursuit trials over {len(conditions)} condition(s) into {run.out_dir}")


def cmd_synth(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("synth", args, cfg)
    seed = cfg.seed if args.seed is None else args.seed
    run.params = {
        "kind": args.kind,
        "spec": args.spec,
        "seed": seed,
        "persons": args.persons,
        "trial_s": args.trial_s,
        "sigma_low": args.sigma_low,
        "sigma_high": args.sigma_high,
        "conditions": args.conditions,
    }
    if args.spec:
        _synth_from_spec(run, Path(args.spec))
    elif args.kind == "iaf-pair":
        _synth_iaf_pair(run, seed)
    elif args.kind == "pupil-step":
        _synth_pupil_step(run, seed, args.persons)
    elif args.kind == "pursuit-set":
        _synth_pursuit_set(run, args, seed)
    else:
        raise ValueError("synth needs --kind or --spec")
    run.finish()
    return 0


# --- analysis commands ------------------------------------------------------------


def cmd_iaf_detect(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("iaf-detect", args, cfg)
    run.params = {"open": args.open, "closed": args.closed}
    eyes_open = load_recording(run.read_input(args.open))
    eyes_closed = load_recording(run.read_input(args.closed))
    search = BandSpec(
        (cfg.iaf_search_low_hz + cfg.iaf_search_high_hz) / 2,
        cfg.iaf_search_low_hz,
        cfg.iaf_search_high_hz,
    )
    band = detect_iaf(
        eyes_open,
        eyes_closed,
        search,
        window_s=cfg.window_s,
        hop_s=cfg.hop_s,
        half_width_hz=cfg.alpha_half_width_hz,
    )
    run.write_json(
        "iaf.json",
        {"peak_hz": band.center_hz, "low_hz": band.low_hz, "high_hz": band.high_hz},
    )
    run.finish()
    print(f"peak_hz={band.center_hz:g} band={band.low_hz:g}-{band.high_hz:g} Hz")
    return 0


def cmd_bandpower(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("bandpower", args, cfg)
    band = _parse_band(args.band)
    run.params = {"recording": args.recording, "band": args.band, "plot": args.plot}
    series = load_recording(run.read_input(args.recording))
    course = band_course(series, band, window_s=cfg.window_s, hop_s=cfg.hop_s)
    rows = "".join(
        f"{float(t)!r},{float(v)!r}\n"
        for t, v in zip(course.frame_times_s, course.values)
    )
    run.write_text("bandpower.csv", "time_s,power\n" + rows)
    if args.plot:
        _render_course(run, course)
    run.finish()
    print(f"{course.n_frames} frames, band {band.low_hz:g}-{band.high_hz:g} Hz -> bandpower.csv")
    return 0


def _render_course(run: _Run, course) -> None:
    # matplotlib is an optional extra; only the --plot path needs it
    import matplotlib
    from matplotlib.figure import Figure

    # fixed hash salt so element ids (and output digests) are reproducible
    matplotlib.rcParams["svg.hashsalt"] = "cogload"
    fig = Figure(figsize=(8, 3))
    ax = fig.add_subplot(111)
    ax.plot(course.frame_times_s, course.values)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(f"power in {course.band.low_hz:g}-{course.band.high_hz:g} Hz")
    fig.tight_layout()
    target = run.out_dir / "bandpower.svg"
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, format="svg", metadata={"Date": None})
    run.note_output("bandpower.svg")


def cmd_pursuit_features(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("pursuit-features", args, cfg)
    run.params = {"index": args.index}
    index_path = run.read_input(args.index)
    base = index_path.parent
    instances = []
    with open(index_path) as fh:
        header = fh.readline().strip().split(",")
        expected = ["person_id", "condition", "repetition_id", "label", "path_file", "gaze_file"]
        if header != expected:
            raise ParseError(1, f"index header must be {','.join(expected)}")
        paths: dict[str, TrajectoryPath] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ParseError(lineno, f"expected 6 columns, got {len(parts)}")
            person, condition, rep, label, path_file, gaze_file = parts
            if path_file not in paths:
                rec = load_recording(run.read_input(base / path_file))
                paths[path_file] = _path_from_recording(rec, condition, cfg)
            gaze_rec = load_recording(run.read_input(base / gaze_file))
            trace = GazeTrace(gaze_rec.data.T.copy(), gaze_rec.rate_hz)
            instances.append(
                build_pursuit_instance(
                    paths[path_file],
                    trace,
                    label=label,
                    person_id=person,
                    condition=condition,
                    repetition_id=int(rep),
                    drop_head_s=cfg.drop_head_s,
                    target_len=cfg.instance_len,
                    smooth_window=cfg.smooth_window_samples,
                    smooth_hop=cfg.smooth_hop_samples,
                )
            )
    ds = FeatureDataset.from_instances(instances)
    save_dataset(ds, run.out_dir / "dataset.csv")
    run.note_output("dataset.csv")
    run.finish()
    print(f"built {ds.n} instances of dim {ds.dim} -> dataset.csv")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("train", args, cfg)
    seed = cfg.seed if args.seed is None else args.seed
    run.params = {"dataset": args.dataset, "C": cfg.svm_c, "epochs": cfg.svm_epochs, "seed": seed}
    ds = load_dataset(run.read_input(args.dataset))
    model = train_linear_svm(ds, C=cfg.svm_c, epochs=cfg.svm_epochs, seed=seed)
    save_model(model, run.out_dir / "model.json")
    run.note_output("model.json")
    run.finish()
    print(f"trained on {ds.n} instances, classes {'/'.join(model.classes)} -> model.json")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("evaluate", args, cfg)
    seed = cfg.seed if args.seed is None else args.seed
    run.params = {"dataset": args.dataset, "scheme": args.scheme, "k": args.k, "seed": seed}
    ds = load_dataset(run.read_input(args.dataset))
    kwargs = dict(C=cfg.svm_c, epochs=cfg.svm_epochs, seed=seed)
    overall = None
    if args.scheme == "lopo":
        overall = leave_one_person_out(ds, **kwargs)
        conditions = per_condition_reports(ds, "lopo", **kwargs)
    else:
        conditions = per_condition_reports(ds, "loro", k=args.k, **kwargs)
    payload = {
        "format": "cogload-eval",
        "version": 1,
        "scheme": args.scheme,
        "overall": None if overall is None else overall.to_dict(),
        "conditions": {name: rep.to_dict() for name, rep in conditions.items()},
    }
    run.write_json("report.json", payload)
    rows = metrics_table(conditions)
    cols = ["condition", "accuracy", "macro_precision", "macro_recall", "macro_f1"]
    text = ",".join(cols) + "\n"
    for row in rows:
        text += ",".join(str(row[c]) for c in cols) + "\n"
    run.write_text("metrics.csv", text)
    run.finish()
    if overall is not None:
        print(f"{args.scheme} pooled accuracy {overall.accuracy:.4f} -> report.json, metrics.csv")
    else:
        summary = " ".join(f"{r['condition']}={r['accuracy']:.4f}" for r in rows)
        print(f"{args.scheme} accuracy {summary} -> report.json, metrics.csv")
    return 0


def cmd_regress(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("regress", args, cfg)
    run.params = {"table": args.table, "x": args.x, "y": args.y, "person": args.person}
    path = run.read_input(args.table)
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path} has no data rows")
    for col in (args.x, args.y) + ((args.person,) if args.person else ()):
        if col not in rows[0]:
            raise ValueError(f"column {col!r} not in {sorted(rows[0])}")
    x = np.array([float(r[args.x]) for r in rows])
    y = np.array([float(r[args.y]) for r in rows])
    fit = fit_linear_regression(x, y)
    fits = {args.x: fit}
    lopo = None
    if args.person:
        persons = tuple(r[args.person] for r in rows)
        ds = FeatureDataset(x.reshape(-1, 1), tuple(repr(float(v)) for v in y), persons)
        lopo = {args.x: lopo_regression(ds)}
    rows_out = regression_table(fits, lopo)
    payload = {
        "format": "cogload-regression",
        "version": 1,
        "fit": fit.diagnostics,
        "lopo": None
        if lopo is None
        else {
            "rmse": lopo[args.x].rmse,
            "r2": lopo[args.x].r2,
            "folds": [
                {"person": f.fold_id, "n": f.n_test, "rmse": f.rmse}
                for f in lopo[args.x].folds
            ],
        },
    }
    run.write_json("regression.json", payload)
    cols = list(rows_out[0])
    text = ",".join(cols) + "\n"
    for row in rows_out:
        text += ",".join(str(row[c]) for c in cols) + "\n"
    run.write_text("regression.csv", text)
    run.finish()
    d = fit.diagnostics
    print(
        f"slope={d['slope']:.6g} intercept={d['intercept']:.6g} r2={d['r2']:.6g} "
        f"rmse={d['rmse']:.6g} -> regression.json, regression.csv"
    )
    return 0


def cmd_stream(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("stream", args, cfg)
    run.params = {
        "recording": args.recording,
        "model": args.model,
        "pipeline": args.pipeline,
        "window_s": args.window_s,
        "hop_s": args.hop_s,
        "band": args.band,
        "reference": args.reference,
        "condition": args.condition,
        "adapt": args.adapt,
        "task_boundary_s": args.task_boundary_s,
        "initial_difficulty": args.initial_difficulty,
    }
    series = load_recording(run.read_input(args.recording))
    model = load_model(run.read_input(args.model))
    band = _parse_band(args.band) if args.band else None
    reference = None
    if args.reference:
        if not args.condition:
            raise ValueError("--reference needs --condition to name its shape and speed")
        rec = load_recording(run.read_input(args.reference))
        reference = _path_from_recording(rec, args.condition, cfg)
    if args.window_s is not None:
        window_s = args.window_s
    elif args.pipeline == "pupil-window":
        window_s = cfg.pupil_window_s
    else:
        window_s = cfg.window_s
    session = make_session(
        args.pipeline,
        model,
        series.rate_hz,
        series.channels,
        window_s=window_s,
        hop_s=args.hop_s,
        band=band,
        reference=reference,
        buffer_capacity_s=cfg.buffer_capacity_s,
        task_boundary_s=args.task_boundary_s,
        initial_difficulty=args.initial_difficulty,
    )
    decisions = push(session, series)
    if args.adapt:
        for decision in decisions:
            adapt_difficulty(session, decision)
    run.write_json("session.json", session_report(session))
    run.finish()
    print(
        f"{len(session.decisions)} decisions, {len(session.commands)} difficulty "
        f"command(s) -> session.json"
    )
    return 0


def cmd_blinks(args) -> int:
    cfg = _resolve_config(args)
    run = _Run("blinks", args, cfg)
    run.params = {
        "recording": args.recording,
        "threshold_uv": cfg.blink_threshold_uv,
        "refractory_s": cfg.blink_refractory_s,
    }
    series = load_recording(run.read_input(args.recording))
    report = count_blinks(series, cfg.blink_threshold_uv, cfg.blink_refractory_s)
    run.write_json(
        "blinks.json",
        {
            "count": report.count,
            "per_minute": report.per_minute,
            "blink_times_s": list(report.blink_times_s),
        },
    )
    run.finish()
    print(f"{report.count} blinks ({report.per_minute:g}/min) -> blinks.json")
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogload",
        description="Workload sensing pipelines over CSV recordings.",
    )
    parser.add_argument("--version", action="version", version=f"cogload {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    common.add_argument("--out", default=".", help="output directory (default: .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="emit synthetic fixture recordings")
    p.add_argument("--kind", choices=("iaf-pair", "pupil-step", "pursuit-set"))
    p.add_argument("--spec", help="generate from a serialized recipe instead of a preset")
    p.add_argument("--seed", type=int)
    p.add_argument("--persons", type=int, default=6)
    p.add_argument("--trial-s", type=float, default=27.0)
    p.add_argument("--sigma-low", type=float, default=2.0)
    p.add_argument("--sigma-high", type=float, default=12.0)
    p.add_argument("--conditions", default="rectangle-slow,rectangle-fast")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("iaf-detect", parents=[common], help="alpha band from an eyes-open/closed pair")
    p.add_argument("--open", required=True, metavar="RECORDING")
    p.add_argument("--closed", required=True, metavar="RECORDING")
    p.set_defaults(func=cmd_iaf_detect)

    p = sub.add_parser("bandpower", parents=[common], help="band power course of a recording")
    p.add_argument("--recording", required=True)
    p.add_argument("--band", required=True, metavar="LOW:HIGH")
    p.add_argument("--plot", action="store_true", help="also render bandpower.svg")
    p.set_defaults(func=cmd_bandpower)

    p = sub.add_parser(
        "pursuit-features", parents=[common], help="build a pursuit instance dataset"
    )
    p.add_argument("--index", required=True, help="trial index CSV referencing path/gaze files")
    p.set_defaults(func=cmd_pursuit_features)

    p = sub.add_parser("train", parents=[common], help="train a linear workload classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="cross-validated evaluation report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scheme", choices=("lopo", "loro"), default="lopo")
    p.add_argument("--k", type=int, help="repetition fold count (loro; default per condition)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("regress", parents=[common], help="linear fit of one column on another")
    p.add_argument("--table", required=True, help="CSV with named columns")
    p.add_argument("-x", "--x", required=True, help="predictor column")
    p.add_argument("-y", "--y", required=True, help="response column")
    p.add_argument("--person", help="person column; adds a held-out-person report")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("stream", parents=[common], help="replay a recording through a live session")
    p.add_argument("--recording", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--pipeline", required=True, choices=("iaf-course", "pupil-window", "pursuit-deviation"))
    p.add_argument("--window-s", type=float)
    p.add_argument("--hop-s", type=float)
    p.add_argument("--band", metavar="LOW:HIGH")
    p.add_argument("--reference", help="stimulus path recording (pursuit-deviation)")
    p.add_argument("--condition", help="condition tag naming the reference shape and speed")
    p.add_argument("--adapt", action="store_true", help="emit difficulty commands")
    p.add_argument("--task-boundary-s", type=float)
    p.add_argument("--initial-difficulty", choices=("easy", "difficult"), default="easy")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("blinks", parents=[common], help="count blink artifacts on Fp1/Fp2")
    p.add_argument("--recording", required=True)
    p.set_defaults(func=cmd_blinks)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (CogloadError, OSError, ValueError, KeyError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
