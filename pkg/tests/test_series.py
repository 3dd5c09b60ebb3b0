import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfcca.errors import DataError
from mfcca.series import (
    NS_PER_DAY,
    NS_PER_SECOND,
    ExclusionWindow,
    ReturnSeries,
    TickSeries,
    align_pair,
    deseasonalize_daily,
    forex_closure_windows,
    load_exclusions_csv,
    load_returns_csv,
    load_ticks_csv,
    normalize_unit_variance,
    parse_iso_ns,
    remove_exclusions,
    to_log_returns,
)

DT = 10 * NS_PER_SECOND


def series_of(values, dt=DT, start=0):
    return ReturnSeries(np.asarray(values, float), dt, start_time=start)


# --- load_ticks_csv -------------------------------------------------------

def test_load_three_rows_preserves_order(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("timestamp,price\n1,10.0\n2,11.0\n5,9.5\n")
    ticks = load_ticks_csv(p)
    assert len(ticks) == 3
    assert ticks.timestamps.tolist() == [1, 2, 5]
    assert ticks.prices.tolist() == [10.0, 11.0, 9.5]


def test_load_without_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,10.0\n2,11.0\n")
    assert len(load_ticks_csv(p)) == 2


def test_negative_price_names_row(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("timestamp,price\n1,10.0\n2,-1.0\n")
    with pytest.raises(DataError, match="row 3"):
        load_ticks_csv(p)


def test_out_of_order_rows(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("5,1.0\n3,1.0\n")
    with pytest.raises(DataError, match="out of order"):
        load_ticks_csv(p)


def test_parse_failure_names_row(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,1.0\n2,abc\n")
    with pytest.raises(DataError, match="row 2"):
        load_ticks_csv(p)


def test_empty_file(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("timestamp,price\n")
    with pytest.raises(DataError, match="no data"):
        load_ticks_csv(p)


def test_iso_timestamps(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("timestamp,price\n2018-01-01T00:00:00Z,1.0\n2018-01-01T00:00:10.5Z,2.0\n")
    ticks = load_ticks_csv(p)
    t0 = parse_iso_ns("2018-01-01T00:00:00")
    assert t0 == 1514764800 * NS_PER_SECOND
    assert ticks.timestamps.tolist() == [t0, t0 + 10_500_000_000]


def test_iso_rejects_offsets():
    with pytest.raises(ValueError):
        parse_iso_ns("2018-01-01T00:00:00+02:00")


def test_tick_series_invariants():
    with pytest.raises(DataError):
        TickSeries(np.array([], dtype=np.int64), np.array([]))
    with pytest.raises(DataError):
        TickSeries(np.array([1, 1]), np.array([1.0, 1.0]))
    with pytest.raises(DataError):
        TickSeries(np.array([1, 2]), np.array([1.0, 0.0]))


# --- to_log_returns -------------------------------------------------------

def test_log_return_of_e_squared_over_e():
    ticks = TickSeries(np.array([0, DT, 2 * DT]), np.array([math.e, math.e**2, math.e**2]))
    r = to_log_returns(ticks, DT)
    assert r.returns[0] == pytest.approx(1.0, abs=1e-15)
    assert r.returns[1] == 0.0


def test_constant_price_gives_exact_zeros():
    ticks = TickSeries(np.arange(20) * DT, np.full(20, 123.4))
    assert np.all(to_log_returns(ticks, DT).returns == 0.0)


def test_trade_gap_fixture():
    # 6 ticks with a gap between t=2 and t=6 (units of DT); hand-computed expectation
    t = np.array([0, 1, 2, 6, 7, 8]) * DT
    p = np.array([100.0, 101.0, 102.0, 99.0, 99.5, 100.5])
    r = to_log_returns(TickSeries(t, p), DT)
    expected = [
        math.log(101 / 100), math.log(102 / 101),
        0.0, 0.0, 0.0,  # grid points 3, 4, 5 carry 102 forward
        math.log(99 / 102), math.log(99.5 / 99), math.log(100.5 / 99.5),
    ]
    np.testing.assert_allclose(r.returns, expected, rtol=0, atol=1e-15)
    assert r.timestamps.tolist() == list(np.arange(8) * DT)


def test_grid_is_anchored_to_epoch_multiples():
    t = np.array([3, 17, 26, 41]) * NS_PER_SECOND
    r = to_log_returns(TickSeries(t, np.array([1.0, 2.0, 3.0, 4.0])), DT)
    assert r.timestamps.tolist() == [10 * NS_PER_SECOND, 20 * NS_PER_SECOND, 30 * NS_PER_SECOND]


def test_span_too_short():
    with pytest.raises(DataError, match="too short"):
        to_log_returns(TickSeries(np.array([0, DT]), np.array([1.0, 2.0])), DT)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.5, 2.0), min_size=3, max_size=60), st.lists(st.integers(1, 3), min_size=60, max_size=60))
def test_cumulative_returns_rebuild_price_grid(prices, gaps):
    t = np.cumsum([0] + gaps[: len(prices) - 1]) * DT
    ticks = TickSeries(t, np.array(prices))
    r = to_log_returns(ticks, DT)
    grid = np.concatenate([r.timestamps, [r.timestamps[-1] + DT]])
    idx = np.searchsorted(ticks.timestamps, grid, side="right") - 1
    rebuilt = prices[0] * np.exp(np.concatenate([[0.0], np.cumsum(r.returns)]))
    np.testing.assert_allclose(rebuilt, ticks.prices[idx], rtol=1e-12)


# --- remove_exclusions ----------------------------------------------------

def three_hours():
    n = 3 * 3600 // 10
    return series_of(np.random.default_rng(0).standard_normal(n))


def test_empty_window_list_is_identity():
    s = three_hours()
    assert remove_exclusions(s, []) is s


def test_window_covering_everything_fails():
    s = three_hours()
    with pytest.raises(DataError):
        remove_exclusions(s, [ExclusionWindow(-DT, 4 * 3600 * NS_PER_SECOND)])


def test_one_hour_window_removes_360():
    s = three_hours()
    hour = 3600 * NS_PER_SECOND
    out = remove_exclusions(s, [ExclusionWindow(hour, 2 * hour, "maintenance")])
    assert len(s) - len(out) == 360
    assert np.all((out.timestamps < hour) | (out.timestamps >= 2 * hour))
    # slot positions follow the original wall clock
    np.testing.assert_array_equal(out.slot_index, (out.timestamps // DT) % (NS_PER_DAY // DT))


def test_overlapping_windows_rejected():
    with pytest.raises(DataError, match="overlap"):
        remove_exclusions(three_hours(), [ExclusionWindow(0, 100 * DT), ExclusionWindow(50 * DT, 200 * DT)])


def test_remove_exclusions_idempotent():
    s = three_hours()
    w = [ExclusionWindow(10 * DT, 40 * DT), ExclusionWindow(500 * DT, 800 * DT)]
    once = remove_exclusions(s, w)
    twice = remove_exclusions(once, w)
    np.testing.assert_array_equal(once.returns, twice.returns)
    np.testing.assert_array_equal(once.timestamps, twice.timestamps)


def test_window_ordering_check():
    with pytest.raises(DataError):
        ExclusionWindow(5, 5)


def test_load_exclusions(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("start,end,reason\n2017-05-07T22:30:00Z,2017-05-07T23:45:00Z,DDoS attack\n")
    (w,) = load_exclusions_csv(p)
    assert w.end - w.start == 75 * 60 * NS_PER_SECOND
    assert w.reason == "DDoS attack"


# --- align_pair ------------------------------------------------------------

def test_identical_supports_unchanged():
    x = series_of(np.arange(10.0))
    y = series_of(np.arange(10.0) * 2)
    pair = align_pair(x, y)
    assert pair.x is x and pair.y is y


def week_series(hours=24 * 14, dt=3600 * NS_PER_SECOND, start=0):
    # 1970-01-01 was a Thursday
    return series_of(np.random.default_rng(1).standard_normal(hours), dt, start)


def test_weekend_gaps_restrict_other_series():
    hour = 3600 * NS_PER_SECOND
    x = week_series(dt=hour)
    windows = forex_closure_windows(int(x.timestamps[0]), int(x.timestamps[-1]) + hour)
    y = remove_exclusions(week_series(dt=hour), windows)
    pair = align_pair(x, y)
    assert len(pair.x) == len(pair.y) == len(y) < len(x)
    np.testing.assert_array_equal(pair.x.timestamps, pair.y.timestamps)
    days = (pair.x.timestamps // NS_PER_DAY + 4) % 7  # 0 = Sunday
    hours = (pair.x.timestamps % NS_PER_DAY) // hour
    assert not np.any(days == 6)  # no Saturday samples
    assert not np.any((days == 5) & (hours >= 22))
    assert not np.any((days == 0) & (hours < 22))


def test_forex_windows_start_friday_22():
    (w, *_) = forex_closure_windows(0, 10 * NS_PER_DAY)
    assert w.start == NS_PER_DAY + 22 * 3600 * NS_PER_SECOND
    assert w.end - w.start == 2 * NS_PER_DAY


def test_disjoint_supports():
    with pytest.raises(DataError, match="no common support"):
        align_pair(series_of(np.ones(5)), series_of(np.ones(5), start=100 * DT))


def test_align_requires_same_delta_t():
    with pytest.raises(DataError):
        align_pair(series_of(np.ones(5)), series_of(np.ones(5), dt=2 * DT))


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(0, 200), min_size=2, max_size=120), st.sets(st.integers(0, 200), min_size=2, max_size=120))
def test_align_lengths_equal(a, b):
    a, b = sorted(a), sorted(b)
    x = ReturnSeries(np.ones(len(a)), DT, timestamps=np.array(a) * DT)
    y = ReturnSeries(np.ones(len(b)), DT, timestamps=np.array(b) * DT)
    try:
        pair = align_pair(x, y)
    except DataError:
        assert len(set(a) & set(b)) < 2
        return
    assert len(pair.x) == len(pair.y)
    np.testing.assert_array_equal(pair.x.timestamps, pair.y.timestamps)


# --- deseasonalize_daily ---------------------------------------------------

HOUR_DT = 3600 * NS_PER_SECOND


def test_per_slot_constant_profile_is_removed():
    days = 30
    rng = np.random.default_rng(2)
    c = np.linspace(0.5, 3.0, 24)
    g = rng.standard_normal(days * 24)
    s = series_of(g * np.tile(c, days), HOUR_DT)
    out = deseasonalize_daily(s)
    per_slot = out.returns.reshape(days, 24).std(axis=0)
    np.testing.assert_allclose(per_slot, 1.0, atol=1e-12)


def test_white_noise_slot_std_near_one():
    days = 100
    g = np.random.default_rng(3).standard_normal(days * 24)
    out = deseasonalize_daily(series_of(g, HOUR_DT))
    per_slot = out.returns.reshape(days, 24).std(axis=0)
    assert np.all(np.abs(per_slot - 1) <= 0.1)


def test_zero_slot_passes_through_with_warning():
    days = 5
    g = np.random.default_rng(4).standard_normal((days, 24))
    g[:, 7] = 0.0
    s = series_of(g.ravel(), HOUR_DT)
    with pytest.warns(RuntimeWarning, match="zero volatility"):
        out = deseasonalize_daily(s)
    assert np.all(out.returns.reshape(days, 24)[:, 7] == 0.0)


def test_deseasonalize_needs_two_days():
    with pytest.raises(DataError, match="2 days"):
        deseasonalize_daily(series_of(np.ones(30), HOUR_DT))


def test_deseasonalize_idempotent():
    days = 10
    g = np.random.default_rng(5).standard_normal(days * 24) * np.tile(np.linspace(1, 4, 24), days)
    once = deseasonalize_daily(series_of(g, HOUR_DT))
    twice = deseasonalize_daily(once)
    np.testing.assert_allclose(twice.returns, once.returns, rtol=1e-9)
    sd = twice.returns.reshape(days, 24).std(axis=0)
    assert np.max(np.abs(sd - 1)) <= 1e-9


def test_absolute_variant_available():
    days = 4
    g = np.random.default_rng(6).standard_normal(days * 24)
    out = deseasonalize_daily(series_of(g, HOUR_DT), method="mean_abs")
    np.testing.assert_allclose(np.abs(out.returns).reshape(days, 24).mean(axis=0), 1.0)


# --- normalize_unit_variance ----------------------------------------------

def test_normalize_already_unit():
    np.testing.assert_allclose(normalize_unit_variance(series_of([1.0, -1.0])).returns, [1.0, -1.0])


def test_normalize_affine():
    out = normalize_unit_variance(series_of([2.0, 0.0, 2.0, 0.0])).returns
    assert out.mean() == pytest.approx(0.0, abs=1e-15)
    assert out.var() == pytest.approx(1.0)


def test_normalize_constant_fails():
    with pytest.raises(DataError, match="zero variance"):
        normalize_unit_variance(series_of([3.0, 3.0, 3.0]))


def test_returns_csv_roundtrip(tmp_path):
    from mfcca.export import write_series_csv

    s = series_of(np.random.default_rng(7).standard_normal(50), start=1234 * DT)
    p = write_series_csv(s, tmp_path / "r.csv", ["provenance line"])
    back = load_returns_csv(p)
    np.testing.assert_array_equal(back.returns, s.returns)
    np.testing.assert_array_equal(back.timestamps, s.timestamps)
    assert back.delta_t == DT


def test_no_warning_on_clean_deseasonalization():
    g = np.random.default_rng(8).standard_normal(3 * 24)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        deseasonalize_daily(series_of(g, HOUR_DT))
