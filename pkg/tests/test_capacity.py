import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydrocast.capacity import LinearFit, fit_linear, predict_capacity
from hydrocast.errors import DomainError, ValidationError
from hydrocast.pipeline import synth_dataset
from hydrocast.series import CapacityRecord


def recs(*pairs):
    return [CapacityRecord(y, float(c)) for y, c in pairs]


EXACT = recs((2014, 100), (2015, 110), (2016, 120), (2017, 130), (2018, 140))


class TestFit:
    def test_exact_line(self):
        fit = fit_linear(EXACT)
        assert (fit.slope, fit.intercept, fit.r2, fit.base_year) == (10.0, 100.0, 1.0, 2014)

    def test_constant(self):
        fit = fit_linear(recs((2017, 100), (2018, 100)))
        assert (fit.slope, fit.intercept, fit.r2) == (0.0, 100.0, 1.0)

    def test_hand_computed_ols(self):
        # Sxy/Sxx = 10/2; intercept 110 - 5*1; r2 = 1 - 150/200
        fit = fit_linear(recs((2016, 100), (2017, 120), (2018, 110)))
        assert fit.slope == pytest.approx(5.0, rel=1e-12)
        assert fit.intercept == pytest.approx(105.0, rel=1e-12)
        assert fit.r2 == pytest.approx(0.25, rel=1e-12)

    def test_lookback_uses_latest_years(self):
        data = recs((2010, 999), (2011, 5)) + EXACT
        fit = fit_linear(data, lookback=5)
        assert fit.base_year == 2014 and fit.slope == 10.0

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            fit_linear(recs((2018, 100)))

    def test_duplicate_years(self):
        with pytest.raises(ValidationError):
            fit_linear(recs((2018, 100), (2018, 120)))

    def test_order_independent(self):
        assert fit_linear(list(reversed(EXACT))) == fit_linear(EXACT)

    def test_synthetic_capacities_are_exactly_linear(self):
        _, caps = synth_dataset(12, seed=3, noise_level=0.2)
        assert fit_linear(caps).r2 == 1.0


class TestPredict:
    def test_extrapolate(self):
        assert predict_capacity(fit_linear(EXACT), 2019) == 150.0

    def test_base_year(self):
        fit = fit_linear(EXACT)
        assert predict_capacity(fit, fit.base_year) == fit.intercept

    def test_constant_fit(self):
        fit = fit_linear(recs((2017, 100), (2018, 100)))
        assert predict_capacity(fit, 2031) == 100.0

    def test_negative_is_unphysical(self):
        fit = fit_linear(recs((2017, 100), (2018, 50)))
        with pytest.raises(DomainError):
            predict_capacity(fit, 2025)

    def test_non_finite_fit_rejected(self):
        with pytest.raises(DomainError):
            LinearFit(float("nan"), 1.0, 1.0, 2000)


years = st.lists(st.integers(1990, 2030), min_size=2, max_size=8, unique=True)
years3 = st.lists(st.integers(1990, 2030), min_size=3, max_size=8, unique=True)
caps = st.floats(100, 1e5)


class TestProperties:
    @settings(max_examples=100, deadline=None)
    @given(years3, st.data())
    def test_r2_one_iff_zero_residuals(self, ys, data):
        ys = sorted(ys)
        slope = data.draw(st.floats(0, 500))
        exact = [CapacityRecord(y, 50_000 + slope * (y - ys[0])) for y in ys]
        assert fit_linear(exact, lookback=None).r2 == pytest.approx(1.0, abs=1e-9)
        noisy = [CapacityRecord(r.year, r.installed_mw + (400 if k == 0 else 0))
                 for k, r in enumerate(exact)]
        assert fit_linear(noisy, lookback=None).r2 < 1.0 - 1e-9

    @settings(max_examples=100, deadline=None)
    @given(years, st.data(), st.integers(-50, 50))
    def test_year_shift(self, ys, data, k):
        values = data.draw(st.lists(caps, min_size=len(ys), max_size=len(ys)))
        a = [CapacityRecord(y, v) for y, v in zip(ys, values)]
        b = [CapacityRecord(y + k, v) for y, v in zip(ys, values)]
        fa, fb = fit_linear(a, None), fit_linear(b, None)
        assert fb.base_year == fa.base_year + k
        line = lambda f, y: f.intercept + f.slope * (y - f.base_year)
        scale = max(values)
        for y in (2020, 2035):
            assert line(fb, y + k) == pytest.approx(line(fa, y), rel=1e-9, abs=1e-9 * scale)

    @settings(max_examples=100, deadline=None)
    @given(years, st.data(), st.floats(1e-3, 1e3))
    def test_capacity_scaling(self, ys, data, c):
        values = data.draw(st.lists(caps, min_size=len(ys), max_size=len(ys)))
        fa = fit_linear([CapacityRecord(y, v) for y, v in zip(ys, values)], None)
        fb = fit_linear([CapacityRecord(y, v * c) for y, v in zip(ys, values)], None)
        scale = max(abs(v) for v in values) * c
        assert fb.slope == pytest.approx(fa.slope * c, rel=1e-9, abs=1e-9 * scale)
        assert fb.intercept == pytest.approx(fa.intercept * c, rel=1e-9, abs=1e-9 * scale)
        assert fb.r2 == pytest.approx(fa.r2, abs=1e-9)
