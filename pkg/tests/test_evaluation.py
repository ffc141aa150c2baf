import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydrocast.errors import DomainError
from hydrocast.evaluation import aggregate_report, mape, plan_folds, rmse, score_year


class TestRmse:
    def test_identical(self):
        assert rmse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_hand_value(self):
        assert rmse([1, 2], [0, 0]) == pytest.approx(math.sqrt(2.5))
        assert rmse([1, 2], [0, 0]) == pytest.approx(1.58114, abs=1e-5)

    @given(st.floats(-1e6, 1e6))
    def test_constant_offset(self, d):
        actual = np.linspace(100, 1000, 12)
        assert rmse(actual + d, actual) == pytest.approx(abs(d), rel=1e-9, abs=1e-6)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            rmse([1, 2], [1])

    def test_empty(self):
        with pytest.raises(DomainError):
            rmse([], [])


class TestMape:
    def test_identical(self):
        assert mape([5, 6], [5, 6]) == 0.0

    def test_single(self):
        assert mape([90], [100]) == pytest.approx(0.10)

    def test_two_terms(self):
        assert mape([110, 180], [100, 200]) == pytest.approx(0.10)

    def test_zero_actual(self):
        with pytest.raises(DomainError):
            mape([1, 2], [0, 2])

    @settings(max_examples=100)
    @given(st.lists(st.floats(1, 1e6), min_size=1, max_size=12), st.floats(1e-3, 1e3), st.data())
    def test_scale_invariance(self, actual, c, data):
        f = data.draw(st.lists(st.floats(0, 1e6), min_size=len(actual), max_size=len(actual)))
        a, f = np.array(actual), np.array(f)
        assert mape(f * c, a * c) == pytest.approx(mape(f, a), rel=1e-9)


class TestReport:
    def test_model2_row(self):
        assert round(aggregate_report(32959, 0.1311).rmse_monthly_avg, 2) == 2746.58

    def test_best_rmse_row(self):
        assert round(aggregate_report(29689, 0.1819).rmse_monthly_avg, 2) == 2474.08

    def test_best_mape_row(self):
        assert round(aggregate_report(32959, 0.1311).mape_monthly_avg_pct, 2) == 1.09

    def test_invariants_exact(self):
        r = aggregate_report(1234.5, 0.37)
        assert r.rmse_monthly_avg == 1234.5 / 12
        assert r.mape_monthly_avg_pct == 0.37 * 100 / 12

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            aggregate_report(-1, 0.1)

    def test_score_year(self):
        actual = np.full(12, 100.0)
        rep = score_year(actual + 5, actual)
        assert rep.rmse_monthly_avg == pytest.approx(5.0)
        assert rep.rmse_annual == pytest.approx(60.0)
        assert rep.mape_annual == pytest.approx(0.05)


class TestFolds:
    def test_144_three_folds(self):
        plan = plan_folds(144, 3)
        # 1-indexed blocks [109..120], [121..132], [133..144]
        assert [(f.test.start + 1, f.test.stop) for f in plan] == [(109, 120), (121, 132), (133, 144)]
        assert [f.train for f in plan] == [(range(0, 108),), (range(0, 120),), (range(0, 132),)]

    def test_single_fold_72(self):
        (fold,) = plan_folds(72, 1)
        assert len(fold.train[0]) == 60 and len(fold.test) == 12

    def test_boundary(self):
        plan = plan_folds(3 * 12 + 12, 3, window=12)
        assert len(plan.folds[0].train[0]) == 12

    def test_too_short(self):
        with pytest.raises(DomainError, match="too short"):
            plan_folds(47, 3, window=12)

    @given(st.integers(1, 5), st.integers(1, 24), st.integers(0, 100))
    def test_forward_invariants(self, k, window, extra):
        plan = plan_folds(k * 12 + window + extra, k, window)
        tests = [set(f.test) for f in plan]
        for a in range(k):
            for b in range(a + 1, k):
                assert not tests[a] & tests[b]
        for f in plan:
            assert len(f.test) == 12
            assert f.train[0].stop == f.test.start
            assert not set(f.train[0]) & set(f.test)

    def test_rotating_mode(self):
        plan = plan_folds(144, 3, mode="rotating")
        assert [(f.test.start, f.test.stop) for f in plan] == [(36, 48), (84, 96), (132, 144)]
        for f in plan:
            covered = set().union(*map(set, f.train)) | set(f.test)
            assert covered == set(range(144))
            assert not set().union(*map(set, f.train)) & set(f.test)

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            plan_folds(144, 3, mode="shuffled")
