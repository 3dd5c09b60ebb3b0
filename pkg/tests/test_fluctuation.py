from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_fluctuation
from mfcca.errors import DataError
from mfcca.fluctuation import (
    box_stats,
    build_profile,
    default_scale_grid,
    detrend_box,
    fluctuation_cross,
    fluctuation_single,
    partition_boxes,
    q_grid,
)
from mfcca.series import ReturnSeries


def test_profile_examples():
    np.testing.assert_array_equal(build_profile([1, -1, 1, -1]).values, [1, 0, 1, 0])
    np.testing.assert_array_equal(build_profile(np.zeros(5)).values, np.zeros(5))
    np.testing.assert_array_equal(build_profile([0.5, 0.5, 0.5]).values, [0.5, 1.0, 1.5])
    assert len(build_profile(ReturnSeries(np.ones(7), 1))) == 7


# --- partition ------------------------------------------------------------

def test_partition_ten_by_three():
    p = partition_boxes(10, 3)
    assert p.num_boxes_one_end == 3
    assert p.box_starts.tolist() == [0, 3, 6, 1, 4, 7]


def test_partition_exact_division_keeps_duplicates():
    p = partition_boxes(8, 4)
    assert p.box_starts.tolist() == [0, 4, 0, 4]
    assert p.num_boxes == 4


@pytest.mark.parametrize("T,s", [(10, 11), (100, 0), (5, -1)])
def test_partition_out_of_range(T, s):
    with pytest.raises(DataError):
        partition_boxes(T, s)


@settings(max_examples=100, deadline=None)
@given(st.integers(4, 2000), st.data())
def test_partition_invariants(T, data):
    s = data.draw(st.integers(4, T))
    p = partition_boxes(T, s)
    M = T // s
    assert p.box_starts.size == 2 * M
    front, back = p.box_starts[:M], p.box_starts[M:]
    assert front.min() == 0 and front.max() + s == M * s
    assert back.min() == T - M * s and back.max() + s == T


# --- detrending -----------------------------------------------------------

def test_quadratic_segment_removed():
    i = np.arange(1, 41, dtype=float)
    seg = 3.0 - 0.5 * i + 0.02 * i**2
    assert np.max(np.abs(detrend_box(seg, (0, 40), 2))) < 1e-10


def test_linear_segment_removed_by_quadratic():
    seg = 7.0 + 2.5 * np.arange(30)
    assert np.max(np.abs(detrend_box(seg, (0, 30), 2))) < 1e-10


def test_mean_removal():
    np.testing.assert_allclose(detrend_box(np.array([0, 1, 0, 1, 0, 1.0]), (0, 6), 0),
                               [-0.5, 0.5, -0.5, 0.5, -0.5, 0.5], atol=1e-15)


def test_box_too_short_for_order():
    with pytest.raises(DataError):
        detrend_box(np.arange(10.0), (0, 3), 2)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_matches_polyfit(m):
    rng = np.random.default_rng(m)
    prof = np.cumsum(rng.standard_normal(300))
    i = np.arange(1, 101, dtype=float)
    seg = prof[100:200]
    ref = seg - np.polyval(np.polyfit(i, seg, m), i)
    np.testing.assert_allclose(detrend_box(prof, (100, 100), m), ref, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(6, 200), elements=st.floats(-1e3, 1e3)), st.integers(0, 3))
def test_detrending_idempotent(seg, m):
    r = detrend_box(seg, (0, seg.size), m)
    again = detrend_box(r, (0, seg.size), m)
    assert np.max(np.abs(again - r)) <= 1e-12 * max(1.0, np.max(np.abs(seg)))


# --- box statistics -------------------------------------------------------

RX = np.array([1, 2, -1, 0, 3, -2, 1, 1, -1, 2, 0, -3], float)
RY = np.array([2, -1, 0, 1, 1, 1, -2, 0, 3, -1, 1, 0], float)


def test_box_stats_hand_computed():
    # linear fits over abscissae 1..6 evaluated in exact rational arithmetic
    cov = [Fraction(-29, 315), Fraction(-1, 18)] * 2
    vx = [Fraction(298, 315), Fraction(11, 9)] * 2
    vy = [Fraction(142, 315), Fraction(172, 315)] * 2
    st_ = box_stats(np.cumsum(RX), np.cumsum(RY), partition_boxes(12, 6), 1)
    np.testing.assert_allclose(st_.per_box_cov, [float(v) for v in cov], rtol=0, atol=1e-13)
    np.testing.assert_allclose(st_.per_box_var_x, [float(v) for v in vx], rtol=0, atol=1e-13)
    np.testing.assert_allclose(st_.per_box_var_y, [float(v) for v in vy], rtol=0, atol=1e-13)


def test_box_stats_reductions():
    px = build_profile(np.random.default_rng(0).standard_normal(500))
    part = partition_boxes(500, 37)
    same = box_stats(px, px, part)
    np.testing.assert_array_equal(same.per_box_cov, same.per_box_var_x)
    neg = box_stats(px.values, -px.values, part)
    np.testing.assert_allclose(neg.per_box_cov, -neg.per_box_var_x, rtol=1e-14)
    assert np.all(neg.per_box_var_y >= 0)


def test_box_stats_length_mismatch():
    with pytest.raises(DataError):
        box_stats(np.zeros(10), np.zeros(11), partition_boxes(10, 5))


# --- fluctuation functions ------------------------------------------------

@pytest.mark.parametrize("seed", [0, 1])
def test_brute_force_agreement(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(1024)
    y = 0.5 * x + rng.standard_normal(1024)
    qs = [-4.0, -2.0, 0.0, 2.0, 4.0]
    scales = [8, 16, 32, 64]
    fm = fluctuation_single(x, qs, scales)
    cm = fluctuation_cross((x, y), [q for q in qs if q != 0], scales)
    for i, q in enumerate(qs):
        for j, s in enumerate(scales):
            ref = naive_fluctuation(x, x, q, s)
            assert abs(fm.values[i, j] - ref) <= 1e-10 * max(1.0, abs(ref))
            if q != 0:
                ref = naive_fluctuation(x, y, q, s)
                got = cm.values[cm.q_index(q), j]
                assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


def test_cross_with_itself_equals_single():
    x = np.random.default_rng(3).standard_normal(4096)
    qs = q_grid(0.2, 4, 0.2)
    a = fluctuation_single(x, qs)
    b = fluctuation_cross((x, x.copy()), qs)
    np.testing.assert_allclose(b.values, a.values, rtol=1e-12, atol=0)
    assert b.defined_mask.all()


def test_cross_with_negation():
    x = np.random.default_rng(4).standard_normal(4096)
    qs = [1.0, 2.0, 4.0]
    a = fluctuation_single(x, qs)
    b = fluctuation_cross((x, -x), qs)
    np.testing.assert_allclose(b.moments, -a.moments, rtol=1e-12)
    assert np.all(b.values < 0)
    assert not b.defined_mask.any()


def test_cross_q0_undefined():
    x = np.random.default_rng(5).standard_normal(2048)
    fm = fluctuation_cross((x, x), [-1.0, 0.0, 1.0])
    assert not fm.defined_mask[1].any()
    assert np.all(np.isnan(fm.values[1]))


def test_independent_pair_changes_sign():
    rng = np.random.default_rng(2024)
    x, y = rng.standard_normal((2, 2**16))
    fm = fluctuation_cross((x, y), [2.0], default_scale_grid(2**16, 10, 2**16 // 4))
    assert np.mean(fm.moments[0] < 0) > 0.2


def test_zero_box_masks_negative_q():
    x = np.random.default_rng(6).standard_normal(1000)
    x[160:176] = 0.0  # one box of length 16, aligned to the front partition
    fm = fluctuation_single(x, [-2.0, -0.2, 0.0, 0.2, 2.0], [16, 20])
    assert not fm.defined_mask[:3, 0].any()
    assert fm.defined_mask[3:, 0].all()
    assert fm.defined_mask[:, 1].all()


def test_white_noise_slope_ten_seeds():
    slopes = []
    scales = default_scale_grid(2**16, 16, 4096)
    for seed in range(10):
        x = np.random.default_rng(100 + seed).standard_normal(2**16)
        F = fluctuation_single(x, [2.0], scales).row(2.0)
        slopes.append(np.polyfit(np.log(scales), np.log(F), 1)[0])
    assert abs(np.mean(slopes) - 0.5) <= 0.03


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([16, 33, 64]))
def test_monotone_in_q(seed, s):
    rng = np.random.default_rng(seed)
    x = rng.standard_t(3, 512)
    qs = q_grid(-4, 4, 0.5)
    F = fluctuation_single(x, qs, [s]).values[:, 0]
    assert np.all(np.diff(F) >= -1e-12 * F[:-1])


def test_scale_grid_default():
    g = default_scale_grid(2**17)
    assert g[0] == 10 and g[-1] == 2**17 // 40
    assert np.all(np.diff(g) > 0)
    ratio = np.log10(g[-1] / g[0])
    assert abs(g.size - 24 * ratio) <= 2


def test_q_grid_contains_zero_exactly():
    g = q_grid()
    assert g.size == 41 and 0.0 in g and g[0] == -4 and g[-1] == 4
    with pytest.raises(ValueError):
        q_grid(q_step=0)


def test_bad_scale_grid():
    with pytest.raises(DataError):
        fluctuation_single(np.ones(50), [2.0], [3, 10])
    with pytest.raises(DataError):
        fluctuation_single(np.ones(50), [2.0], [10, 60])
