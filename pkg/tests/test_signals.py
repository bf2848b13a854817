"""Containers and windowing arithmetic."""

import numpy as np
import pytest

from cogload.errors import TooShort, UnknownChannel, ZeroLengthWindow
from cogload.signals import (
    TimeSeries,
    channel_mean,
    freeze,
    make_window_plan,
    select_channels,
    trim_edges,
)


def series_of(n, rate=250.0, channels=("c0",), t0=0.0, annotations=(), seed=None):
    if seed is None:
        data = np.zeros((len(channels), n))
    else:
        data = np.random.default_rng(seed).standard_normal((len(channels), n))
    return TimeSeries(rate, channels, data, t0, annotations)


def test_data_is_frozen_and_owned():
    src = np.ones((1, 10))
    s = TimeSeries(10.0, ("a",), src)
    src[0, 0] = 99.0
    assert s.data[0, 0] == 1.0
    with pytest.raises(ValueError):
        s.data[0, 0] = 5.0


def test_one_dimensional_data_becomes_single_row():
    s = TimeSeries(10.0, ("a",), np.arange(5.0))
    assert s.data.shape == (1, 5)
    assert s.n_channels == 1 and s.n_samples == 5


def test_sample_times_and_duration():
    s = series_of(50, rate=10.0, t0=2.0)
    assert s.duration_s == 5.0
    assert s.end_s == 7.0
    assert np.array_equal(s.times_s(), 2.0 + np.arange(50) / 10.0)


def test_annotations_sorted_and_bounded():
    s = series_of(100, rate=10.0, annotations=((9.0, "late"), (1.0, "early")))
    assert s.annotations == ((1.0, "early"), (9.0, "late"))
    with pytest.raises(ValueError):
        series_of(100, rate=10.0, annotations=((11.0, "out"),))


def test_channel_label_count_must_match_rows():
    with pytest.raises(ValueError):
        TimeSeries(10.0, ("a", "b"), np.zeros((3, 4)))


def test_channel_index_unknown_and_ambiguous():
    s = TimeSeries(10.0, ("a", "b", "a"), np.zeros((3, 4)))
    assert s.channel_index("b") == 1
    with pytest.raises(UnknownChannel):
        s.channel_index("z")
    with pytest.raises(UnknownChannel):
        s.channel_index("a")


def test_equality_includes_nan_samples():
    data = np.array([[1.0, np.nan, 3.0]])
    assert TimeSeries(10.0, ("a",), data) == TimeSeries(10.0, ("a",), data.copy())
    assert TimeSeries(10.0, ("a",), data) != TimeSeries(10.0, ("a",), np.ones((1, 3)))


def test_freeze_returns_readonly_float64_copy():
    a = np.array([1, 2, 3])
    f = freeze(a)
    assert f.dtype == np.float64 and not f.flags.writeable
    a[0] = 7
    assert f[0] == 1.0


# --- window plans ----------------------------------------------------------


def test_window_plan_ten_seconds_at_250():
    plan = make_window_plan(series_of(2500), 1.0, 0.5)
    assert (plan.window_len, plan.hop_len, plan.frame_count) == (250, 125, 19)


def test_window_plan_single_frame_boundary():
    plan = make_window_plan(series_of(250), 1.0, 0.5)
    assert plan.frame_count == 1


def test_window_plan_matches_brute_force_enumeration():
    # 30 s at 128 Hz: count every start with start + window_len <= samples
    s = series_of(30 * 128, rate=128.0)
    plan = make_window_plan(s, 1.0, 0.5)
    starts = [k for k in range(0, s.n_samples, plan.hop_len) if k + plan.window_len <= s.n_samples]
    assert plan.frame_count == len(starts) == 59
    assert np.array_equal(plan.frame_starts(), starts)


def test_window_plan_frames_stay_in_bounds():
    for n, rate, w, h in ((1000, 250.0, 0.8, 0.3), (777, 128.0, 1.0, 0.25), (64, 64.0, 1.0, 1.0)):
        plan = make_window_plan(series_of(n, rate=rate), w, h)
        if plan.frame_count:
            assert plan.frame_start(plan.frame_count - 1) + plan.window_len <= n
            assert plan.frame_start(plan.frame_count) + plan.window_len > n


def test_window_plan_shorter_than_window_gives_zero_frames():
    assert make_window_plan(series_of(100), 1.0, 0.5).frame_count == 0


def test_window_plan_zero_length_rejected():
    with pytest.raises(ZeroLengthWindow):
        make_window_plan(series_of(100, rate=10.0), 0.01, 0.5)
    with pytest.raises(ZeroLengthWindow):
        make_window_plan(series_of(100, rate=10.0), 1.0, 0.01)
    with pytest.raises(ValueError):
        make_window_plan(series_of(100), -1.0, 0.5)


# --- edge trimming ----------------------------------------------------------


def test_trim_edges_sixty_seconds_minus_twice_four():
    out = trim_edges(series_of(60 * 250), 4.0)
    assert out.duration_s == 52.0
    assert out.t0_s == 4.0


def test_trim_edges_zero_is_identity():
    s = series_of(100)
    assert trim_edges(s, 0.0) == s


def test_trim_edges_sample_count_and_annotations():
    s = series_of(25 * 250, annotations=((2.0, "drop"), (5.0, "keep")))
    out = trim_edges(s, 4.0)
    assert out.n_samples == 4250
    assert out.annotations == ((5.0, "keep"),)


def test_trim_edges_too_short():
    with pytest.raises(TooShort):
        trim_edges(series_of(8 * 250), 4.0)


def test_trim_then_zero_trim_is_idempotent():
    s = series_of(3000, seed=1)
    once = trim_edges(s, 2.0)
    assert trim_edges(once, 0.0) == once


# --- channel mean and selection ----------------------------------------------


def test_channel_mean_single_channel_identity():
    s = series_of(40, seed=2)
    out = channel_mean(s)
    assert np.array_equal(out.data, s.data)
    assert out.channels == ("mean",)


def test_channel_mean_is_order_symmetric():
    a = TimeSeries(10.0, ("x", "y", "z"), np.array([[1.0] * 4, [2.0] * 4, [3.0] * 4]))
    b = TimeSeries(10.0, ("z", "y", "x"), np.array([[3.0] * 4, [2.0] * 4, [1.0] * 4]))
    assert np.array_equal(channel_mean(a).data[0], np.full(4, 2.0))
    assert np.array_equal(channel_mean(a).data, channel_mean(b).data)


def test_channel_mean_matches_per_sample_loop():
    s = series_of(200, channels=tuple(f"c{i}" for i in range(14)), seed=3)
    naive = np.array([s.data[:, k].mean() for k in range(s.n_samples)])
    assert np.allclose(channel_mean(s).data[0], naive, atol=1e-12, rtol=0)


def test_channel_mean_unit_agreement():
    same = TimeSeries(10.0, ("a", "b"), np.zeros((2, 4)), units=("uV", "uV"))
    mixed = TimeSeries(10.0, ("a", "b"), np.zeros((2, 4)), units=("uV", "mm"))
    assert channel_mean(same).units == ("uV",)
    assert channel_mean(mixed).units == ("",)


def test_select_channels_identity_and_subset():
    s = series_of(30, channels=tuple(f"ch{i}" for i in range(32)), seed=4)
    assert select_channels(s, s.channels) == s
    oz = s.channels[7]
    one = select_channels(s, (oz,))
    assert one.channels == (oz,)
    assert np.array_equal(one.data[0], s.data[7])


def test_select_channels_occipital_order_preserved():
    wanted = ("Pz", "P3", "P7", "O1", "Oz", "O2", "P4", "P8")
    layout = wanted[::-1] + tuple(f"x{i}" for i in range(24))
    s = series_of(20, channels=layout, seed=5)
    out = select_channels(s, wanted)
    assert out.channels == wanted
    for i, name in enumerate(wanted):
        assert np.array_equal(out.data[i], s.data[s.channel_index(name)])


def test_select_channels_unknown_label():
    with pytest.raises(UnknownChannel):
        select_channels(series_of(10), ("nope",))


def test_mean_of_full_selection_equals_mean():
    s = series_of(64, channels=("a", "b", "c"), seed=6)
    assert channel_mean(select_channels(s, s.channels)) == channel_mean(s)


def test_operations_are_pure():
    s = series_of(1000, channels=("a", "b"), seed=7)
    before = s.data.copy()
    trim_edges(s, 1.0)
    channel_mean(s)
    select_channels(s, ("b",))
    make_window_plan(s, 1.0, 0.5)
    assert np.array_equal(s.data, before)
    assert trim_edges(s, 1.0) == trim_edges(s, 1.0)
