import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stats_fixtures as fx
from casimirkit import stats as S

POLICY = S.ErrorCombinationPolicy()


def test_total_error_plug_in():
    p = S.MeasurementPoint(300.0, 10.0, 1.0, 1.0, 1.0)
    # r = 1 sits midway in r/(1+r)
    assert POLICY.q(1.0) == pytest.approx(0.76)
    assert S.total_experimental_error(p) == pytest.approx(0.76 * 2.0)
    fixed = S.ErrorCombinationPolicy(q_low=0.75, q_high=0.75)
    assert S.total_experimental_error(p, fixed) == pytest.approx(1.5)


@settings(max_examples=200, deadline=None)
@given(*[st.floats(0, 1e3, allow_subnormal=False)] * 3)
def test_q_range_containment(d_rand, d_syst, s_mean):
    p = S.MeasurementPoint(300.0, 1.0, d_rand, d_syst, s_mean)
    total = S.total_experimental_error(p)
    if d_rand + d_syst > 0:
        # q (x + y) / (x + y) may land one ulp off q
        ulp = 1 + 4 * np.finfo(float).eps
        assert 0.71 / ulp <= total / (d_rand + d_syst) <= 0.81 * ulp


def test_infinite_ratio_uses_limit_entry():
    p = S.MeasurementPoint(300.0, 1.0, 0.0, 2.0, 0.0)
    assert S.error_ratio(p) == math.inf
    assert S.total_experimental_error(p) == pytest.approx(0.81 * 2.0)


def test_negligible_random_error_tracks_systematic():
    for d_syst in (0.5, 1.0, 4.0):
        p = S.MeasurementPoint(300.0, 1.0, 1e-9, d_syst, 0.1)
        total = S.total_experimental_error(p)
        assert 0.71 <= total / d_syst <= 0.81


def test_q_table_policy():
    pol = S.ErrorCombinationPolicy(table=((0.0, 0.71), (1.0, 0.76), (10.0, 0.81)))
    assert pol.q(0.5) == pytest.approx(0.735)
    assert pol.q(math.inf) == 0.81
    with pytest.raises(ValueError):
        S.ErrorCombinationPolicy(table=((0.0, 0.70), (1.0, 0.8)))
    with pytest.raises(ValueError):
        S.ErrorCombinationPolicy(table=((0.0, 0.8), (1.0, 0.75)))


def test_relative_error_profile_fixture():
    prof = S.relative_error_profile(fx.relative_error_series())
    for (a, rel), (ta, target) in zip(prof, fx.RELATIVE_ERROR_TARGETS):
        assert a == ta
        assert rel == pytest.approx(target, rel=1e-12)


def test_relative_error_is_scale_invariant():
    series = fx.relative_error_series()
    scaled = [S.MeasurementPoint(p.a, 10 * p.mean, 10 * p.d_rand, 10 * p.d_syst, 10 * p.s_mean) for p in series]
    a = [r for _, r in S.relative_error_profile(series)]
    b = [r for _, r in S.relative_error_profile(scaled)]
    assert np.allclose(a, b, rtol=1e-14)
    with pytest.raises(ValueError):
        S.relative_error_profile([S.MeasurementPoint(300.0, 0.0, 1.0, 1.0, 1.0)])


def test_agreement_measure_fixture():
    series, theory = fx.agreement_series()
    xi = S.make_xi(series, theory, rule="quadrature")
    prof = S.agreement_measure(xi, series)
    for (a, m), (ta, target) in zip(prof, fx.AGREEMENT_TARGETS):
        assert a == ta
        assert m == pytest.approx(target, rel=1e-12)
    doubled = S.agreement_measure(lambda x: 2 * xi(x), series)
    assert [m for _, m in doubled] == pytest.approx([2 * m for _, m in prof])
    # widening by the theoretical error can only raise the measure
    rel = S.relative_error_profile(series)
    assert all(m >= r for (_, m), (_, r) in zip(prof, rel))


def test_linear_xi_rule():
    series, theory = fx.agreement_series()
    xi = S.make_xi(series, theory, rule="linear")
    for p in series:
        de = S.total_experimental_error(p)
        dt = theory(p.a)
        assert xi(p.a) == pytest.approx(POLICY.q(dt / de) * (de + dt))
    with pytest.raises(ValueError):
        S.make_xi(series, theory, rule="rms")


def test_level_factor():
    assert S.level_factor(0.95) == 1.0
    assert S.level_factor(0.999) == pytest.approx(3.2905267 / 1.9599640, rel=1e-6)


def test_band_identical_to_data_is_consistent():
    series = fx.dense_series()
    a = [p.a for p in series]
    band = S.TheoryBand.from_center(a, [p.mean for p in series], [1e-3 * abs(p.mean) for p in series])
    v = S.band_overlap_method(series, band)
    assert all(v.flags)
    assert v.verdict == S.Consistent(0.95)


def test_band_far_away_is_excluded():
    series = fx.dense_series()
    a = [p.a for p in series]
    w = np.array([1e-3 * abs(p.mean) for p in series])
    d = np.array([S.total_experimental_error(p) for p in series])
    band = S.TheoryBand.from_center(a, [p.mean for p in series] + 10 * (d + w), w)
    v = S.band_overlap_method(series, band)
    assert not any(v.flags)
    assert v.verdict == S.ExcludedAt(0.95)


def test_offset_band_excluded_on_window_only():
    series = fx.dense_series()
    band = fx.offset_band(series)
    v = S.band_overlap_method(series, band, subranges=((500.0, 600.0), (160.0, 450.0)))
    sub, low = v.subranges
    assert sub.verdict == S.ExcludedAt(0.95)
    assert low.verdict == S.Consistent(0.95)
    assert v.over(650.0, 750.0).verdict == S.Consistent(0.95)


def test_cross_uses_separation_arm():
    # a band that only passes through the cross at a shifted separation
    band = S.TheoryBand([100.0, 200.0, 300.0], [0.0, 10.0, 20.0], [0.0, 10.0, 20.0])
    p = S.MeasurementPoint(200.0, 11.5, 0.5, 0.5, 0.5, d_a=0.0)
    assert not band.meets(p.a - p.d_a, p.a + p.d_a, 11.0, 12.0)
    assert band.meets(p.a - 15.0, p.a + 15.0, 11.0, 12.0)


def test_band_coverage_is_checked():
    series = fx.dense_series()
    band = S.TheoryBand([300.0, 400.0], [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        S.band_overlap_method(series, band)


def test_difference_interval_trivial_cases():
    a = np.linspace(160, 750, 50)
    xi = lambda x: 1.0 + 0 * x  # noqa: E731
    for level in (0.95, 0.999):
        zero = S.difference_interval_method([(x, 0.0) for x in a], xi, level)
        assert zero.verdict == S.Consistent(level)
        out = S.difference_interval_method([(x, 2.0) for x in a], xi, level)
        assert out.verdict == S.ExcludedAt(level)
    with pytest.raises(ValueError):
        S.difference_interval_method([(300.0, 0.0)], lambda x: 0.0)


def test_two_level_fixture():
    diffs, xi, shrink = fx.two_level_differences()
    v95 = S.difference_interval_method(diffs, xi, 0.95)
    assert np.mean(v95.flags) == pytest.approx(0.96)
    assert v95.verdict == S.Consistent(0.95)
    v999 = S.difference_interval_method(diffs, lambda x: xi(x, shrink), 0.999)
    assert 1 - np.mean(v999.flags) == pytest.approx(0.97)
    assert v999.verdict == S.ExcludedAt(0.999)


def test_tight_subrange_and_level_ordering():
    diffs, xi = fx.tight_subrange_differences()
    v999 = S.difference_interval_method(diffs, xi, 0.999, subranges=((500.0, 600.0),))
    v95 = S.difference_interval_method(diffs, lambda x: xi(x, 0.95), 0.95, subranges=((500.0, 600.0),))
    assert v999.subranges[0].verdict == S.ExcludedAt(0.999)
    assert v95.subranges[0].verdict == S.ExcludedAt(0.95)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=5, max_size=40), st.floats(1.0, 5.0))
def test_widening_never_turns_consistent_into_excluded(values, factor):
    diffs = [(160.0 + 10 * i, v) for i, v in enumerate(values)]
    narrow = S.difference_interval_method(diffs, lambda x: 1.0)
    wide = S.difference_interval_method(diffs, lambda x: factor)
    assert sum(wide.flags) >= sum(narrow.flags)
    if narrow.verdict.kind == "consistent":
        assert wide.verdict.kind == "consistent"


def test_methods_agree_when_band_width_is_theory_error():
    series = fx.dense_series(d_a=0.0)
    band = fx.offset_band(series)
    out = S.compare(series, band, subranges=((500.0, 600.0), (160.0, 450.0)))
    bo = out["band_overlap"]["subranges"]
    di = out["difference_interval"]["subranges"]
    assert [r["verdict"] for r in bo] == [r["verdict"] for r in di]


def test_sliding_windows():
    w = S.sliding_windows([160.0, 300.0, 400.0])
    assert w[0] == (160.0, 260.0)
    assert w[1] == (210.0, 310.0)
    assert w[-1][1] >= 400.0


def test_decide_inconclusive_middle_ground():
    flags = [True] * 50 + [False] * 50
    assert S.decide(flags, 0.95).kind == "inconclusive"
    with pytest.raises(ValueError):
        S.decide([], 0.95)


def test_csv_round_trip_and_json(tmp_path):
    series = fx.dense_series()
    band = fx.offset_band(series)
    S.write_series(tmp_path / "s.csv", series)
    S.write_band(tmp_path / "b.csv", band)
    series2 = S.read_series(tmp_path / "s.csv")
    band2 = S.read_band(tmp_path / "b.csv")
    assert series2 == series
    assert np.array_equal(band2.lo, band.lo) and np.array_equal(band2.hi, band.hi)
    a = S.verdict_json(S.compare(series, band))
    b = S.verdict_json(S.compare(series2, band2))
    assert a == b
    doc = json.loads(a)
    assert doc["band_overlap"]["method"] == "BandOverlap"


def test_series_file_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a_nm,mean,d_rand\n1,2,3\n")
    with pytest.raises(ValueError, match="missing column"):
        S.read_series(bad)
    bad.write_text("a_nm,mean,d_rand,d_syst,s_mean\n1,2,x,4,5\n")
    with pytest.raises(ValueError, match="row 2"):
        S.read_series(bad)


def test_measurement_validation():
    with pytest.raises(ValueError):
        S.MeasurementPoint(0.0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        S.MeasurementPoint(1.0, 1.0, -1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        S.TheoryBand([1.0, 2.0], [1.0, 3.0], [2.0, 2.0])
