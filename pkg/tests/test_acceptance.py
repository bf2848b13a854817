"""Release gate: each test pins one end-to-end guarantee at a fixed tolerance.

Every check prints a single `criterion NN <name>: PASS/FAIL (<measurement>)`
line; run `pytest tests/test_acceptance.py -v -s` to see them.  Fixtures are
synthetic signals with analytically known answers or independent brute-force
oracles, so the whole gate runs at desk scale with no recorded data.
"""

import json
import math
import time

import numpy as np

from cogload.cli import run_cli
from cogload.eeg import count_blinks
from cogload.gaze import (
    GazeTrace,
    TrajectoryPath,
    build_pursuit_instance,
    gen_trajectory,
    pupil_window_feature,
    pursuit_deviation,
)
from cogload.learn import (
    FeatureDataset,
    fit_linear_regression,
    leave_one_person_out,
    lopo_regression,
    metrics_table,
    per_condition_reports,
    regression_table,
    repetition_fold_count,
    train_linear_svm,
)
from cogload.signals import TimeSeries, make_window_plan
from cogload.spectral import BandSpec, band_power, detect_iaf, ssd, stft_power
from cogload.stream import adapt_difficulty, batch_decisions, make_session, push
from cogload.synth import (
    EegComponent,
    Envelope,
    NBackSchedule,
    SynthSpec,
    gen_eeg,
    gen_gaze,
    gen_nback_schedule,
    gen_pupil,
)

RATE = 250.0


def check(num, name, ok, detail):
    print(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num:02d} {name}: {detail}"


def test_criterion_01_iaf_detection():
    t0 = time.time()
    base = dict(kind="eeg", duration_s=10.0, rate_hz=RATE, channels=("Oz",), noise_sigma=1.0)
    hits = 0
    for seed in range(100):
        eyes_open = gen_eeg(SynthSpec(seed=2 * seed, **base))
        eyes_closed = gen_eeg(
            SynthSpec(seed=2 * seed + 1, components=(EegComponent(10.0, 0.35),), **base)
        )
        band = detect_iaf(eyes_open, eyes_closed)
        if (
            abs(band.center_hz - 10.0) <= 0.5
            and band.low_hz == band.center_hz - 2.0
            and band.high_hz == band.center_hz + 2.0
        ):
            hits += 1
    dt = time.time() - t0
    check(1, "iaf detection", hits == 100 and dt < 5.0, f"{hits}/100 within 0.5 Hz, {dt:.2f} s")


def test_criterion_02_spectral_power_correctness():
    # energy conservation: per-frame bin sum equals windowed energy / sum(w^2)
    worst_parseval = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        data = rng.standard_normal(2500)
        series = TimeSeries(RATE, ("c",), data.reshape(1, -1))
        plan = make_window_plan(series, 1.0, 0.5)
        spec = stft_power(series, plan)
        w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(plan.window_len) / plan.window_len)
        denom = float(np.sum(w * w))
        for i in range(plan.frame_count):
            frame = data[i * plan.hop_len : i * plan.hop_len + plan.window_len]
            expected = float(np.sum((w * frame) ** 2)) / denom
            rel = abs(float(spec.frames[i].sum()) - expected) / expected
            worst_parseval = max(worst_parseval, rel)
    # in-band tone power scales as amplitude squared
    t = np.arange(2500) / RATE
    powers = {}
    for amp in (0.5, 1.0, 2.0, 4.0):
        series = TimeSeries(RATE, ("c",), (amp * np.sin(2 * np.pi * 10.0 * t)).reshape(1, -1))
        spec = stft_power(series, make_window_plan(series, 1.0, 0.5))
        powers[amp] = float(band_power(spec, BandSpec(10.0, 8.0, 12.0)).mean())
    worst_scale = max(
        abs(powers[a] / powers[1.0] - a * a) / (a * a) for a in powers
    )
    ok = worst_parseval <= 0.01 and worst_scale <= 0.02
    check(
        2,
        "spectral power correctness",
        ok,
        f"parseval rel {worst_parseval:.2e}, amp^2 rel {worst_scale:.2e}",
    )


def _inband_snr(rate_hz, chan):
    one = TimeSeries(rate_hz, ("x",), chan.reshape(1, -1))
    spec = stft_power(one, make_window_plan(one, 1.0, 0.5))
    sig = float(band_power(spec, BandSpec(10.0, 8.0, 12.0)).mean())
    flank = float(band_power(spec, BandSpec(6.0, 5.0, 7.0)).mean()) + float(
        band_power(spec, BandSpec(14.0, 13.0, 15.0)).mean()
    )
    return sig / flank


def test_criterion_03_ssd_band_snr_gain():
    n = int(RATE * 30.0)
    t = np.arange(n) / RATE
    mix_sig = np.array([1.0, 0.8, -0.6, 0.4])
    mix_f1 = np.array([0.5, -1.0, 0.7, 0.9])
    mix_f2 = np.array([-0.8, 0.3, 1.0, -0.5])
    gains = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        sig = np.sin(2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi))
        f1 = np.sin(2 * np.pi * 6.0 * t + rng.uniform(0, 2 * np.pi))
        f2 = np.sin(2 * np.pi * 14.0 * t + rng.uniform(0, 2 * np.pi))
        data = (
            np.outer(mix_sig, sig)
            + 1.5 * np.outer(mix_f1, f1)
            + 1.5 * np.outer(mix_f2, f2)
            + 0.05 * rng.standard_normal((4, n))
        )
        series = TimeSeries(RATE, ("a", "b", "c", "d"), data)
        result = ssd(series, BandSpec(10.0, 8.0, 12.0), flank_hz=2.0, gap_hz=1.0, shrinkage=0.05)
        component = result.apply(series, 1)
        snr_component = _inband_snr(RATE, component.data[0])
        snr_best_raw = max(_inband_snr(RATE, data[c]) for c in range(4))
        gains.append(10.0 * math.log10(snr_component / snr_best_raw))
    gains = np.array(gains)
    ok = bool((gains >= 6.0).all())
    check(3, "ssd band-snr gain", ok, f"min {gains.min():.1f} dB, median {np.median(gains):.1f} dB over 20 seeds")


def test_criterion_04_pursuit_deviation_oracle():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(50, 200))
        target = rng.uniform(0.0, 1000.0, (n, 2))
        gaze = rng.uniform(0.0, 1000.0, (n, 2))
        path = TrajectoryPath("circle", 450.0, target, RATE, (1680, 1050), cycle_s=1.0)
        dev = pursuit_deviation(path, GazeTrace(gaze, RATE))
        for i in range(n):
            ref = math.hypot(gaze[i, 0] - target[i, 0], gaze[i, 1] - target[i, 1])
            worst = max(worst, abs(float(dev[i]) - ref) / ref)
    target = np.zeros((100, 2)) + 500.0
    offset = pursuit_deviation(
        TrajectoryPath("circle", 450.0, target, RATE, (1680, 1050), cycle_s=1.0),
        GazeTrace(target + np.array([3.0, 4.0]), RATE),
    )
    ok = worst <= 1e-9 and bool(np.all(offset == 5.0))
    check(4, "pursuit deviation oracle", ok, f"max rel {worst:.1e} over 1000 pairs, (3,4) -> 5 exact")


def test_criterion_05_noise_monotonicity():
    t0 = time.time()
    failures = 0
    runs = 0
    for shape in ("rectangle", "circle", "sine"):
        for speed in (450.0, 650.0):
            path = gen_trajectory(shape, speed, 12.0)
            for seed in range(30):
                means = []
                for sigma in (1.0, 5.0, 10.0, 20.0):
                    trace = gen_gaze(path, sigma, 0.0, seed=seed)
                    inst = build_pursuit_instance(
                        path, trace, label="x", person_id="p", target_len=2251
                    )
                    means.append(float(inst.values.mean()))
                runs += 1
                if not all(a < b for a, b in zip(means, means[1:])):
                    failures += 1
    dt = time.time() - t0
    ok = runs == 180 and failures == 0
    check(5, "noise monotonicity", ok, f"{runs - failures}/{runs} strictly increasing, {dt:.1f} s")


def test_criterion_06_leave_one_person_out_protocol():
    t0 = time.time()
    path = gen_trajectory("rectangle", 450.0, 27.0)
    instances = []
    trial = 0
    for p in range(10):
        for rep in range(2):
            for label, sigma in (("low", 2.0), ("high", 12.0)):
                trace = gen_gaze(path, sigma, 0.0, seed=trial)
                trial += 1
                instances.append(
                    build_pursuit_instance(
                        path,
                        trace,
                        label=label,
                        person_id=f"P{p:02d}",
                        condition="rectangle-slow",
                        repetition_id=rep,
                    )
                )
    ds = FeatureDataset.from_instances(instances)
    report = leave_one_person_out(ds)

    rng = np.random.default_rng(123)
    y = np.asarray(ds.y)
    perm_accs = []
    for _ in range(50):
        perm = ds.relabeled(tuple(y[rng.permutation(ds.n)]))
        perm_accs.append(leave_one_person_out(perm).accuracy)
    mean_perm = float(np.mean(perm_accs))
    half = 1.96 * math.sqrt(0.25 / (50 * ds.n))
    in_ci = 0.5 - half <= mean_perm <= 0.5 + half

    fold_table = tuple(
        repetition_fold_count(f"{shape}-{speed}")
        for shape in ("rectangle", "circle", "sine")
        for speed in ("slow", "fast")
    )
    rows = metrics_table(per_condition_reports(ds, "lopo"))
    shaped = set(rows[0]) >= {"condition", "accuracy", "macro_precision", "macro_recall", "macro_f1"}

    dt = time.time() - t0
    ok = (
        report.accuracy >= 0.99
        and in_ci
        and fold_table == (2, 3, 5, 7, 2, 3)
        and shaped
        and dt < 60.0
    )
    check(
        6,
        "leave-one-person-out protocol",
        ok,
        f"pooled {report.accuracy:.4f}, perm mean {mean_perm:.4f} in [{0.5 - half:.4f}, {0.5 + half:.4f}], "
        f"folds {fold_table}, {dt:.1f} s",
    )


def test_criterion_07_regression_recovery():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 4.0, 51)
    y = 0.8 * x + 0.1 + rng.normal(0.0, 0.02, 51)
    persons = tuple(f"P{i % 17:02d}" for i in range(51))
    fit = fit_linear_regression(x, y)
    held_out = lopo_regression(FeatureDataset(x.reshape(-1, 1), tuple(repr(float(v)) for v in y), persons))
    rows = regression_table({"wpm": fit}, {"wpm": held_out})
    shaped = set(rows[0]) >= {"predictor", "f_stat", "r", "r2", "rmse", "lopo_rmse"}
    d = fit.diagnostics
    ok = (
        abs(d["slope"] - 0.8) <= 0.008
        and d["r2"] >= 0.99
        and held_out.rmse <= 0.05
        and shaped
    )
    check(
        7,
        "regression recovery",
        ok,
        f"slope {d['slope']:.5f}, r2 {d['r2']:.5f}, held-out rmse {held_out.rmse:.4f}",
    )


def _frontal_spikes(spike_times, duration_s=60.0, width_s=0.024):
    data = np.zeros((2, int(duration_s * RATE)))
    for t0 in spike_times:
        start = int(t0 * RATE)
        data[:, start : start + int(width_s * RATE)] = 300.0
    return TimeSeries(RATE, ("Fp1", "Fp2"), data, 0.0, (), ("uV", "uV"))


def test_criterion_08_blink_counting():
    results = []
    for k in (0, 1, 5, 40):
        times = tuple(1.0 + 1.4 * i for i in range(k))
        report = count_blinks(_frontal_spikes(times))
        results.append(report.count == k and report.per_minute == float(k))
    merged = count_blinks(_frontal_spikes((10.0, 10.05, 10.1)))
    ok = all(results) and merged.count == 1 and merged.per_minute == 1.0
    check(
        8,
        "blink counting",
        ok,
        f"counts 0/1/5/40 {'exact' if all(results) else 'WRONG'}, 50 ms triple merges to {merged.count}",
    )


def _pupil_spec(seed):
    return SynthSpec(
        kind="pupil",
        duration_s=60.0,
        rate_hz=60.0,
        seed=seed,
        base_mm=3.5,
        gain_mm=0.3,
        noise_sigma_mm=0.05,
        envelope=Envelope("step", (20.0, 0.0, 1.0)),
    )


def _step_model(seeds):
    X, y, ids = [], [], []
    for k in seeds:
        series = gen_pupil(_pupil_spec(k))
        for i, mean in enumerate(pupil_window_feature(series, 5.0)):
            X.append([mean])
            y.append("high" if i * 5.0 >= 20.0 else "low")
            ids.append(f"T{k}")
    return train_linear_svm(FeatureDataset(np.array(X), tuple(y), tuple(ids)))


def test_criterion_09_streaming_equivalence():
    series = gen_pupil(_pupil_spec(0))
    model = _step_model(range(1000, 1010))

    def fresh_session():
        return make_session("pupil-window", model, series.rate_hz, series.channels, window_s=5.0)

    reference = batch_decisions(fresh_session(), series)
    identical = 0
    n = series.n_samples
    for seed in range(20):
        rng = np.random.default_rng(seed)
        cuts = np.sort(rng.choice(np.arange(1, n), size=int(rng.integers(1, 40)), replace=False))
        session = fresh_session()
        streamed = []
        for a, b in zip(np.r_[0, cuts], np.r_[cuts, n]):
            streamed.extend(push(session, series.data[:, a:b]))
        if streamed == reference:
            identical += 1
    ok = identical == 20 and len(reference) == 12
    check(9, "streaming equivalence", ok, f"{identical}/20 partitionings bit-identical to batch")


def test_criterion_10_adaptive_loop():
    model = _step_model(range(1000, 1010))
    hits = 0
    same_direction_runs = 0
    for seed in range(100):
        series = gen_pupil(_pupil_spec(seed))
        session = make_session(
            "pupil-window",
            model,
            series.rate_hz,
            series.channels,
            window_s=5.0,
            task_boundary_s=5.0,
            initial_difficulty="difficult",
        )
        for decision in push(session, series):
            adapt_difficulty(session, decision)
        easing = [c for c in session.commands if c.new_difficulty == "easy"]
        if easing and easing[0].at_time_s == 25.0:
            hits += 1
        for a, b in zip(session.commands, session.commands[1:]):
            if a.new_difficulty == b.new_difficulty:
                same_direction_runs += 1
    ok = hits >= 95 and same_direction_runs == 0
    check(
        10,
        "adaptive loop",
        ok,
        f"first easing at 25.0 s in {hits}/100 seeds, {same_direction_runs} same-direction repeats",
    )


def test_criterion_11_nback_engine():
    consistent = 0
    for seed in range(1000):
        n = 1 + seed % 3
        length = 20 + seed % 41
        rate = (0.2, 0.3, 0.4)[seed % 3]
        sched = gen_nback_schedule(n, length, rate, seed=seed)
        flags = tuple(
            i >= n and sched.stimuli[i] == sched.stimuli[i - n] for i in range(length)
        )
        if sched.is_match == flags:
            consistent += 1
    known = NBackSchedule.from_stimuli(2, (5, 8, 3, 4, 3, 9, 1))
    one_match = sum(known.is_match) == 1 and known.is_match[4]
    trial = gen_nback_schedule(2, 20, 0.3, seed=0)
    spans = trial.span_s == 70.0 and trial.onset_times_s[-1] == 66.5
    ok = consistent == 1000 and one_match and spans
    check(
        11,
        "n-back engine",
        ok,
        f"{consistent}/1000 schedules rule-consistent, known sequence 1 match, 20 stimuli span {trial.span_s:g} s",
    )


def test_criterion_12_cli_end_to_end(tmp_path):
    def pipeline(base):
        raw, feats, fit, ev = (base / s for s in ("raw", "feats", "fit", "eval"))
        steps = (
            ("synth", raw, ["synth", "--kind", "pursuit-set", "--seed", "0", "--persons", "3",
                            "--conditions", "rectangle-slow", "--out", str(raw)]),
            ("pursuit-features", feats, ["pursuit-features", "--index", str(raw / "index.csv"),
                                         "--out", str(feats)]),
            ("train", fit, ["train", "--dataset", str(feats / "dataset.csv"), "--out", str(fit)]),
            ("evaluate", ev, ["evaluate", "--dataset", str(feats / "dataset.csv"),
                              "--scheme", "lopo", "--out", str(ev)]),
        )
        digests = {}
        for command, out_dir, argv in steps:
            assert run_cli(argv) == 0
            manifest = json.loads((out_dir / f"{command}.manifest.json").read_text())
            digests[command] = manifest["outputs"]
        accuracy = json.loads((ev / "report.json").read_text())["overall"]["accuracy"]
        return digests, accuracy

    t0 = time.time()
    first, acc_first = pipeline(tmp_path / "run1")
    dt = time.time() - t0
    second, _ = pipeline(tmp_path / "run2")
    ok = first == second and dt < 60.0 and acc_first >= 0.99
    check(
        12,
        "cli end-to-end",
        ok,
        f"4 commands in {dt:.1f} s, rerun digests {'match' if first == second else 'DIFFER'}, "
        f"lopo accuracy {acc_first:.4f}",
    )
