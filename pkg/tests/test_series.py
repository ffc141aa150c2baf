import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydrocast import series
from hydrocast.errors import CapacityLookupError, DomainError, ParseError, ValidationError
from hydrocast.pipeline import synth_dataset
from hydrocast.series import (
    CapacityRecord,
    GenerationSeries,
    MonthlyPoint,
    capacity_factor,
    denormalize,
    fit_scaler,
    make_windows,
    monthly_stats,
    normalize_generation,
    seasonal_profile,
)


def _year(y, values):
    return [MonthlyPoint(y, m, v) for m, v in enumerate(values, start=1)]


class TestCapacityFactor:
    def test_zero_production(self):
        assert capacity_factor(0, 1000) == 0.0

    def test_full_year_full_capacity(self):
        assert capacity_factor(8_760_000, 1000) == 1.0

    def test_forty_percent_is_about_3500_hours(self):
        assert series.full_load_hours(0.40) == pytest.approx(3504.0)

    def test_above_one_is_returned_unclamped(self):
        assert capacity_factor(2 * 8_760_000, 1000) == 2.0

    @pytest.mark.parametrize("installed", [0, -5])
    def test_non_positive_capacity(self, installed):
        with pytest.raises(DomainError):
            capacity_factor(10, installed)


class TestSeriesConstruction:
    def test_shuffled_input_is_sorted(self):
        pts = _year(2010, range(12)) + _year(2011, range(12, 24))
        random.Random(3).shuffle(pts)
        s = GenerationSeries.from_points(pts)
        np.testing.assert_array_equal(s.values, np.arange(24))

    def test_unsorted_constructor_rejects(self):
        pts = _year(2010, range(12))
        with pytest.raises(ValidationError, match="chronological"):
            GenerationSeries(tuple(reversed(pts)))

    def test_gap_is_rejected_and_named(self):
        pts = _year(2010, range(12))
        del pts[4]
        with pytest.raises(ValidationError, match="2010-05"):
            GenerationSeries.from_points(pts)

    def test_duplicate_is_rejected(self):
        pts = _year(2010, range(12)) + [MonthlyPoint(2010, 3, 1.0)]
        with pytest.raises(ValidationError):
            GenerationSeries.from_points(pts)

    def test_year_boundary_is_contiguous(self):
        s = GenerationSeries.from_values(2010, 11, [1, 2, 3])
        assert [(p.year, p.month) for p in s.points] == [(2010, 11), (2010, 12), (2011, 1)]

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            GenerationSeries(())

    @pytest.mark.parametrize("month", [0, 13])
    def test_bad_month(self, month):
        with pytest.raises(ValidationError):
            MonthlyPoint(2010, month, 1.0)

    def test_negative_value(self):
        with pytest.raises(ValidationError):
            MonthlyPoint(2010, 1, -1.0)

    def test_capacity_must_be_positive(self):
        with pytest.raises(ValidationError):
            CapacityRecord(2010, 0.0)


class TestNormalization:
    def test_direct_division(self):
        s = GenerationSeries((MonthlyPoint(2010, 5, 7200.0),))
        n = normalize_generation(s, [CapacityRecord(2010, 1000.0)])
        assert n.values[0] == 7.2

    def test_zero_value(self):
        s = GenerationSeries((MonthlyPoint(2010, 5, 0.0),))
        assert normalize_generation(s, [CapacityRecord(2010, 1000.0)]).values[0] == 0.0

    def test_equal_mwh_different_capacity(self):
        s = GenerationSeries.from_values(2010, 12, [5000.0, 5000.0])
        n = normalize_generation(s, [CapacityRecord(2010, 1000.0), CapacityRecord(2011, 1250.0)])
        h = n.values
        # 5 h and 4 h: ratio of hours is IP2/IP1
        assert h[0] == 5.0 and h[1] == 4.0
        assert h[0] / h[1] == pytest.approx(1250.0 / 1000.0)

    def test_missing_year_named(self):
        s = GenerationSeries.from_values(2010, 12, [1.0, 1.0])
        with pytest.raises(CapacityLookupError, match="2011"):
            normalize_generation(s, [CapacityRecord(2010, 1000.0)])

    def test_ceiling_warns_not_raises(self):
        s = GenerationSeries((MonthlyPoint(2010, 1, 800_000.0),))
        with pytest.warns(UserWarning, match="744"):
            n = normalize_generation(s, [CapacityRecord(2010, 1000.0)])
        assert n.values[0] == 800.0

    def test_denormalize_examples(self):
        assert denormalize(7.2, 1000) == pytest.approx(7200.0)
        assert denormalize(0.0, 1234.5) == 0.0

    def test_denormalize_rejects_negative_hours(self):
        with pytest.raises(DomainError):
            denormalize(-0.1, 1000)

    @settings(max_examples=300, deadline=None)
    @given(st.one_of(st.just(0.0), st.floats(1e-6, 1e9)), st.floats(1e-3, 1e6))
    def test_round_trip(self, v, ip):
        s = GenerationSeries((MonthlyPoint(2010, 1, v),))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            h = normalize_generation(s, [CapacityRecord(2010, ip)]).values[0]
        back = denormalize(h, ip)
        assert back == pytest.approx(v, rel=1e-12, abs=0)


class TestMonthlyStats:
    def test_single_year(self):
        s = GenerationSeries.from_values(2010, 1, np.arange(1, 13) * 10.0)
        for m, st_ in monthly_stats(s).items():
            assert st_.min == st_.max == st_.mean == 10.0 * m

    def test_may_aggregate(self):
        vals = np.ones(36)
        vals[[4, 16, 28]] = [10, 20, 30]
        st_ = monthly_stats(GenerationSeries.from_values(2010, 1, vals))[5]
        assert (st_.min, st_.max, st_.mean) == (10, 30, 20)

    def test_absent_months_are_marked(self):
        s = GenerationSeries.from_values(2010, 3, [1.0, 2.0])
        stats = monthly_stats(s)
        assert stats[1] is None and stats[3].mean == 1.0

    def test_synthetic_peak_may_trough_october(self):
        gen, _ = synth_dataset(12, seed=1)
        stats = monthly_stats(gen)
        means = [stats[m].mean for m in range(1, 13)]
        assert int(np.argmax(means)) + 1 == 5
        assert int(np.argmin(means)) + 1 == 10


class TestSeasonalProfile:
    def test_all_equal_is_half(self):
        s = GenerationSeries.from_values(2010, 1, [3.0] * 12)
        assert seasonal_profile(s).coefficients == (0.5,) * 12

    def test_linear_ramp(self):
        s = GenerationSeries.from_values(2010, 1, np.arange(12) * 2.0 + 7)
        np.testing.assert_allclose(seasonal_profile(s).coefficients, np.arange(12) / 11, atol=1e-15)

    def test_missing_month_named(self):
        s = GenerationSeries.from_values(2010, 1, np.arange(11.0))
        with pytest.raises(ValidationError, match="December"):
            seasonal_profile(s)

    def test_synthetic_profile_against_spreadsheet_pass(self):
        gen, caps = synth_dataset(10, seed=0)
        norm = normalize_generation(gen, caps)
        # independent pass: bucket by hand with plain lists
        buckets = {m: [] for m in range(1, 13)}
        for p in norm.points:
            buckets[p.month].append(p.hours)
        means = [sum(buckets[m]) / len(buckets[m]) for m in range(1, 13)]
        lo, hi = min(means), max(means)
        expected = [(v - lo) / (hi - lo) for v in means]
        prof = seasonal_profile(norm)
        np.testing.assert_allclose(prof.coefficients, expected, atol=1e-12)
        assert prof[5] == 1.0 and prof[10] == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 10_000), min_size=12, max_size=12, unique=True),
           st.floats(-1e3, 1e3), st.floats(1e-2, 1e2))
    def test_affine_invariance(self, means, shift, scale):
        base = GenerationSeries.from_values(2010, 1, means)
        moved = GenerationSeries.from_values(2010, 1, [scale * v + shift + 2e3 for v in means])
        a = np.array(seasonal_profile(base).coefficients)
        b = np.array(seasonal_profile(moved).coefficients)
        assert np.argmax(a) == np.argmax(b) and np.argmin(a) == np.argmin(b)
        np.testing.assert_allclose(a, b, atol=1e-6)


class TestScaler:
    def test_two_points(self):
        s = fit_scaler([2, 4])
        assert s.apply(2) == 0 and s.apply(4) == 1 and s.apply(3) == 0.5

    def test_constant_rejected(self):
        with pytest.raises(DomainError):
            fit_scaler([3, 3, 3])

    def test_equal_bounds_rejected(self):
        with pytest.raises(DomainError):
            series.MinMaxScaler(1.0, 1.0)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2).filter(lambda v: min(v) < max(v)))
    def test_round_trip_and_monotone(self, vals):
        s = fit_scaler(vals)
        x = np.sort(np.array(vals))
        np.testing.assert_allclose(s.invert(s.apply(x)), x, rtol=1e-12, atol=1e-12 * (s.hi - s.lo))
        y = s.apply(x)
        assert np.all(np.diff(y) >= 0)
        resolvable = np.diff(x) > 1e-9 * (s.hi - s.lo)
        assert np.all(np.diff(y)[resolvable] > 0)


class TestWindows:
    def test_enumeration(self):
        w = make_windows([1, 2, 3, 4], 2)
        assert [(list(s.inputs), s.target) for s in w] == [([1, 2], 3), ([2, 3], 4)]

    def test_one_sample(self):
        assert len(make_windows(range(7), 6)) == 1

    def test_120_months_window_12(self):
        assert len(make_windows(np.arange(120.0), 12)) == 108

    def test_too_short(self):
        with pytest.raises(DomainError, match="at least 4"):
            make_windows([1, 2, 3], 3)

    def test_aux_channel(self):
        w = make_windows([1, 2, 3], 2, aux=[10, 20, 30])
        np.testing.assert_array_equal(w[0].inputs, [[1, 10], [2, 20]])
        assert w[0].target == 3

    @given(st.integers(2, 200), st.data())
    def test_count_law(self, n, data):
        L = data.draw(st.integers(1, n - 1))
        assert len(make_windows(np.arange(float(n)), L)) == n - L


class TestCsv:
    def test_round_trip(self, tmp_path, synth10):
        gen, caps = synth10
        series.write_generation_csv(gen, tmp_path / "g.csv")
        series.write_capacity_csv(caps, tmp_path / "c.csv")
        assert series.read_generation_csv(tmp_path / "g.csv") == gen
        assert series.read_capacity_csv(tmp_path / "c.csv") == caps

    def test_parse_error_reports_line_and_field(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("year,month,mwh\n2010,1,5\n2010,2,abc\n")
        with pytest.raises(ParseError) as info:
            series.read_generation_csv(p)
        assert info.value.line == 3 and info.value.field == "mwh"
        assert "g.csv:3" in str(info.value)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("yr,mw\n2010,5\n")
        with pytest.raises(ParseError, match="header"):
            series.read_capacity_csv(p)

    def test_gap_in_file(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("year,month,mwh\n2010,1,5\n2010,3,5\n")
        with pytest.raises(ValidationError, match="2010-02"):
            series.read_generation_csv(p)

    def test_duplicate_capacity_year(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("year,installed_mw\n2010,5\n2010,6\n")
        with pytest.raises(ParseError) as info:
            series.read_capacity_csv(p)
        assert info.value.line == 3
