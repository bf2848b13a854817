"""Pursuit trajectories, deviation features, and pupil windows."""

import numpy as np
import pytest

from cogload.errors import (
    EmptyAfterTrim,
    GeometryOverflow,
    LengthMismatch,
    NoValidSamples,
    TooShort,
)
from cogload.gaze import (
    GazeTrace,
    TrajectoryPath,
    build_pursuit_instance,
    condition_name,
    condition_parts,
    figure_perimeter,
    gen_trajectory,
    normalize_deviation,
    pupil_window_feature,
    pursuit_deviation,
    smooth_running_mean,
)
from cogload.signals import TimeSeries
from cogload.synth import Envelope, SynthSpec, gen_gaze, gen_pupil


# --- trajectories -----------------------------------------------------------


def test_circle_cycle_time_from_radius_and_speed():
    path = gen_trajectory("circle", 450.0, 10.0, circle_radius=200.0)
    assert np.isclose(path.cycle_s, 2 * np.pi * 200.0 / 450.0, rtol=1e-12)
    assert path.cycle_s == pytest.approx(2.7925268031909273)


def test_rectangle_cycle_time_from_perimeter():
    path = gen_trajectory("rectangle", 650.0, 10.0, rect_size=(800.0, 400.0))
    assert path.cycle_s == pytest.approx(2400.0 / 650.0)


def test_cycles_close_on_their_start_point():
    for shape, speed in (("rectangle", 650.0), ("circle", 450.0), ("sine", 450.0)):
        path = gen_trajectory(shape, speed, 20.0)
        k = int(round(path.cycle_s * path.rate_hz))
        gap = np.linalg.norm(path.points[k] - path.points[0])
        assert gap < 1.0, f"{shape} cycle reopens by {gap:.3f} px"


def test_cycle_time_matches_figure_perimeter():
    for shape in ("rectangle", "circle", "sine"):
        path = gen_trajectory(shape, 450.0, 5.0)
        assert np.isclose(path.cycle_s * 450.0, figure_perimeter(shape), rtol=1e-9)


def test_default_figure_perimeters():
    assert figure_perimeter("rectangle") == pytest.approx(2 * 0.6 * (1680 + 1050))
    assert figure_perimeter("circle") == pytest.approx(2 * np.pi * 0.3 * 1050)
    with pytest.raises(ValueError):
        figure_perimeter("triangle")


def test_constant_speed_along_the_arc():
    step = 450.0 / 250.0
    circle = gen_trajectory("circle", 450.0, 10.0)
    d_circle = np.linalg.norm(np.diff(circle.points, axis=0), axis=1)
    assert np.allclose(d_circle, step, rtol=0.01)
    rect = gen_trajectory("rectangle", 450.0, 10.0)
    d_rect = np.linalg.norm(np.diff(rect.points, axis=0), axis=1)
    # corner steps cut the corner, so they are shorter, never longer
    assert np.all(d_rect <= step * 1.01)
    assert np.median(d_rect) == pytest.approx(step, rel=1e-9)
    sine = gen_trajectory("sine", 450.0, 10.0)
    d_sine = np.linalg.norm(np.diff(sine.points, axis=0), axis=1)
    # sweep turnarounds fold the chord back on itself, shortening it
    assert np.all(d_sine <= step * 1.01)
    assert np.median(d_sine) == pytest.approx(step, rel=0.01)


def test_trajectory_stays_on_screen():
    for shape in ("rectangle", "circle", "sine"):
        path = gen_trajectory(shape, 650.0, 30.0)
        margin = path.dot_diameter_px / 2
        assert path.points[:, 0].min() >= margin - 1e-9
        assert path.points[:, 0].max() <= 1680 - margin + 1e-9
        assert path.points[:, 1].min() >= margin - 1e-9
        assert path.points[:, 1].max() <= 1050 - margin + 1e-9


def test_oversized_figures_overflow():
    with pytest.raises(GeometryOverflow):
        gen_trajectory("rectangle", 450.0, 5.0, rect_size=(2000.0, 400.0))
    with pytest.raises(GeometryOverflow):
        gen_trajectory("circle", 450.0, 5.0, circle_radius=600.0)
    with pytest.raises(GeometryOverflow):
        gen_trajectory("sine", 450.0, 5.0, sine_amplitude=600.0)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        gen_trajectory("triangle", 450.0, 5.0)
    with pytest.raises(ValueError):
        gen_trajectory("circle", -1.0, 5.0)
    with pytest.raises(ValueError):
        TrajectoryPath("circle", 450.0, np.zeros((5, 3)), 250.0, (100, 100))


def test_condition_names_round_trip():
    assert condition_name("circle", 450.0) == "circle-slow"
    assert condition_name("sine", 650.0) == "sine-fast"
    assert condition_name("sine", 500.0) == "sine-500"
    assert condition_parts("circle-fast") == ("circle", 650.0)
    assert condition_parts("rectangle-slow") == ("rectangle", 450.0)
    with pytest.raises(ValueError):
        condition_parts("circle-medium")
    with pytest.raises(ValueError):
        condition_parts("blob-slow")


# --- deviation and normalization ----------------------------------------------


def straight_path(n=100, rate=250.0):
    pts = np.column_stack([np.linspace(0, 99, n), np.zeros(n)])
    return TrajectoryPath("circle", 450.0, pts, rate, (1680, 1050))


def test_deviation_of_perfect_tracking_is_zero():
    path = straight_path()
    gaze = GazeTrace(path.points.copy(), path.rate_hz)
    assert np.all(pursuit_deviation(path, gaze) == 0.0)


def test_deviation_is_euclidean_distance():
    path = straight_path(n=1)
    gaze = GazeTrace(path.points + np.array([[3.0, 4.0]]), path.rate_hz)
    assert pursuit_deviation(path, gaze)[0] == 5.0


def test_deviation_matches_per_sample_loop():
    rng = np.random.default_rng(2)
    path = straight_path(n=400)
    gaze = GazeTrace(path.points + rng.standard_normal((400, 2)) * 7, path.rate_hz)
    devs = pursuit_deviation(path, gaze)
    naive = [float(np.hypot(*(gaze.points[k] - path.points[k]))) for k in range(400)]
    assert np.allclose(devs, naive, atol=1e-9)


def test_deviation_length_and_rate_checks():
    path = straight_path(n=100)
    with pytest.raises(LengthMismatch):
        pursuit_deviation(path, GazeTrace(np.zeros((99, 2)), 250.0))
    with pytest.raises(LengthMismatch):
        pursuit_deviation(path, GazeTrace(np.zeros((100, 2)), 128.0))


def test_normalize_deviation_by_trial_maximum():
    assert np.array_equal(normalize_deviation(np.array([0.0, 5.0, 10.0])), [0.0, 0.5, 1.0])
    assert np.array_equal(normalize_deviation(np.zeros(4)), np.zeros(4))
    rng = np.random.default_rng(3)
    for _ in range(20):
        devs = rng.uniform(0, 100, size=50)
        out = normalize_deviation(devs)
        assert out.max() == 1.0 and out.min() >= 0.0
    with pytest.raises(TooShort):
        normalize_deviation(np.array([]))
    with pytest.raises(ValueError):
        normalize_deviation(np.ones(3), mode="z-score")


# --- running-mean smoothing --------------------------------------------------


def test_smoothing_preserves_constants():
    out = smooth_running_mean(np.full(1000, 4.2), window=250, hop=1)
    assert out.shape == (751,)
    assert np.allclose(out, 4.2, atol=1e-12)


def test_smoothing_spreads_an_impulse():
    x = np.zeros(1000)
    x[500] = 1.0
    out = smooth_running_mean(x, window=250, hop=1)
    covered = (np.arange(751) <= 500) & (np.arange(751) + 250 > 500)
    assert np.allclose(out[covered], 1.0 / 250.0)
    assert np.all(out[~covered] == 0.0)
    assert covered.sum() == 250


def test_smoothing_matches_naive_loop():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(500)
    out = smooth_running_mean(x, window=50, hop=7)
    naive = [x[i : i + 50].mean() for i in range(0, 451, 7)]
    assert np.allclose(out, naive, atol=1e-9)


def test_smoothing_input_checks():
    with pytest.raises(TooShort):
        smooth_running_mean(np.ones(10), window=50)
    with pytest.raises(ValueError):
        smooth_running_mean(np.ones(10), window=0)


# --- instance chain -----------------------------------------------------------


def test_instance_chain_lengths_thirty_second_trial():
    # 7500 samples, drop 2 s -> 7000, smooth 250/1 -> 6751, cut -> 6000
    path = gen_trajectory("circle", 450.0, 30.0)
    gaze = gen_gaze(path, noise_sigma_px=6.0, seed=0)
    inst = build_pursuit_instance(path, gaze, label="high", person_id="P00")
    assert inst.values.shape == (6000,)
    assert inst.adjustment == ("truncated", 751)
    assert inst.condition == "circle-slow"
    assert 0.0 <= inst.values.min() and inst.values.max() <= 1.0


def test_instance_perfect_tracking_is_all_zero():
    path = gen_trajectory("circle", 450.0, 30.0)
    gaze = gen_gaze(path, noise_sigma_px=0.0)
    inst = build_pursuit_instance(path, gaze, label="low", person_id="P01")
    assert np.all(inst.values == 0.0)


def test_instance_short_trial_pads_with_final_value():
    path = gen_trajectory("circle", 450.0, 10.0)
    gaze = gen_gaze(path, noise_sigma_px=3.0, seed=1)
    inst = build_pursuit_instance(path, gaze, label="low", person_id="P02")
    # 2500 - 500 - 249 = 1751 real samples, rest is padding
    assert inst.adjustment == ("padded", 4249)
    assert np.all(inst.values[1751:] == inst.values[1750])


def test_instance_mean_grows_with_tracking_noise():
    path = gen_trajectory("rectangle", 650.0, 12.0)
    means = []
    for sigma in (1.0, 5.0, 20.0):
        gaze = gen_gaze(path, noise_sigma_px=sigma, seed=7)
        inst = build_pursuit_instance(path, gaze, label="x", person_id="P03")
        means.append(inst.values.mean())
    assert means[0] < means[1] < means[2]


def test_instance_screen_normalization_reference():
    path = gen_trajectory("circle", 450.0, 12.0)
    gaze = gen_gaze(path, noise_sigma_px=5.0, seed=2)
    inst = build_pursuit_instance(path, gaze, label="x", person_id="P04")
    assert inst.norm_mode == "screen"
    assert inst.norm_reference_px == pytest.approx(np.hypot(1680, 1050))
    trial = build_pursuit_instance(
        path, gaze, label="x", person_id="P04", norm_mode="trial-max"
    )
    assert trial.values.max() <= 1.0
    assert trial.values.mean() > inst.values.mean()


def test_instance_trim_longer_than_trial():
    path = gen_trajectory("circle", 450.0, 1.0)
    gaze = gen_gaze(path, noise_sigma_px=1.0, seed=3)
    with pytest.raises(EmptyAfterTrim):
        build_pursuit_instance(path, gaze, label="x", person_id="P05")


def test_instance_value_range_is_enforced():
    with pytest.raises(ValueError):
        import cogload.gaze as gz

        gz.PursuitInstance(np.array([0.5, 1.5]), "x", "P06", "circle-slow", 0)


# --- pupil windows -------------------------------------------------------------


def test_pupil_windows_of_constant_series():
    diam = TimeSeries(30.0, ("pupil",), np.full(450, 3.5), units=("mm",))
    assert np.array_equal(pupil_window_feature(diam, 5.0), [3.5, 3.5, 3.5])


def test_pupil_windows_track_a_step():
    spec = SynthSpec(
        kind="pupil", duration_s=15.0, rate_hz=30.0, seed=0,
        base_mm=3.5, gain_mm=0.5, envelope=Envelope("step", (5.0, 0.0, 1.0)),
    )
    feats = pupil_window_feature(gen_pupil(spec), 5.0)
    assert np.array_equal(feats, [3.5, 4.0, 4.0])


def test_pupil_windows_ignore_trailing_partial_window():
    diam = TimeSeries(30.0, ("pupil",), np.full(510, 2.0))
    assert pupil_window_feature(diam, 5.0).shape == (3,)


def test_pupil_windows_skip_nan_samples():
    x = np.full(300, 4.0)
    x[10:20] = np.nan
    x[200] = 10.0
    feats = pupil_window_feature(TimeSeries(30.0, ("pupil",), x), 5.0)
    assert feats[0] == 4.0
    assert feats[1] == pytest.approx((149 * 4.0 + 10.0) / 150)


def test_pupil_window_with_no_valid_samples_raises():
    x = np.full(300, 4.0)
    x[150:300] = np.nan
    with pytest.raises(NoValidSamples) as err:
        pupil_window_feature(TimeSeries(30.0, ("pupil",), x), 5.0)
    assert err.value.window == 1


def test_pupil_window_validation():
    diam = TimeSeries(30.0, ("pupil",), np.full(60, 3.0))
    with pytest.raises(TooShort):
        pupil_window_feature(diam, 5.0)
    with pytest.raises(ValueError):
        pupil_window_feature(TimeSeries(30.0, ("a", "b"), np.zeros((2, 300))), 5.0)
    with pytest.raises(ValueError):
        pupil_window_feature(diam, 0.0)
