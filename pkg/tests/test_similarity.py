import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvref.errors import EmptySeries, ZeroVariance
from mvref.similarity import (
    ExceptionalDegenerate,
    TestResult,
    compute_S,
    evaluate,
    sharpe_diff_test,
    sharpe_ratio,
    t_cdf,
    t_test_mean,
)

from oracles import mean_sd_two_pass, normal_cdf, t_cdf_quad


class TestComputeS:
    def test_zero(self):
        assert compute_S([0.01] * 5, 0.01) == 0.0

    def test_two_point(self):
        d = 0.003
        assert compute_S([0.01 + d, 0.01 - d], 0.01) == pytest.approx(d * d, rel=1e-12)

    def test_loop(self, rng):
        x = rng.standard_normal(7) * 0.02
        acc = 0.0
        for v in x:
            acc += (v - 0.004) ** 2
        assert compute_S(x, 0.004) == pytest.approx(acc / 7, abs=1e-15)

    def test_empty(self):
        with pytest.raises(EmptySeries):
            compute_S([], 0.0)

    def test_decomposition(self, rng):
        x = rng.standard_normal(50) * 0.02 + 0.01
        S = compute_S(x, 0.004)
        T = len(x)
        assert S == pytest.approx((T - 1) / T * x.var(ddof=1) + (x.mean() - 0.004) ** 2, abs=1e-12)


class TestTCdf:
    def test_symmetry_point(self):
        for df in (1, 2, 7, 1e6):
            assert t_cdf(0.0, df) == 0.5

    def test_cauchy(self):
        assert t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-15)

    def test_quantile_region(self):
        # quadrature oracle gives 0.9749999973089545
        assert t_cdf(2.776445, 4) == pytest.approx(0.9749999973089545, abs=1e-10)

    @pytest.mark.parametrize("df", [1, 2, 3, 5, 10, 30, 200])
    def test_against_quadrature(self, df):
        for x in (-6.0, -2.5, -0.3, 0.7, 1.9, 4.0, 25.0):
            assert t_cdf(x, df) == pytest.approx(t_cdf_quad(x, df), abs=1e-10)

    def test_normal_limit(self):
        for x in np.linspace(-4, 4, 33):
            assert abs(t_cdf(x, 1e6) - normal_cdf(x)) < 1e-3

    @settings(max_examples=200, deadline=None)
    @given(x=st.floats(-50, 50), df=st.integers(1, 500))
    def test_symmetry(self, x, df):
        assert t_cdf(-x, df) + t_cdf(x, df) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(x=st.floats(-20, 20), dx=st.floats(0, 5), df=st.integers(1, 100))
    def test_monotone(self, x, dx, df):
        assert t_cdf(x, df) <= t_cdf(x + dx, df) + 1e-15

    def test_infinite(self):
        assert t_cdf(math.inf, 3) == 1.0
        assert t_cdf(-math.inf, 3) == 0.0


class TestMeanTest:
    def test_exact_match(self):
        res = t_test_mean([1, 2, 3, 4, 5], 3.0)
        assert res.statistic == 0.0
        assert res.p_value == 1.0
        assert not res.reject
        assert res.df == 4

    def test_known_statistic(self):
        res = t_test_mean([1, 2, 3, 4, 5], 2.0)
        assert res.statistic == pytest.approx(math.sqrt(2), rel=1e-14)
        assert res.df == 4
        # 2 * (1 - F(sqrt 2)) by quadrature of the df=4 density
        assert res.p_value == pytest.approx(0.23019964108049873, abs=1e-12)
        assert not res.reject
        assert res.ci[0] < 3 < res.ci[1]

    def test_constant(self):
        with pytest.raises(ZeroVariance):
            t_test_mean([0.01, 0.01, 0.01], 0.02)

    def test_too_short(self):
        with pytest.raises(EmptySeries):
            t_test_mean([0.01, 0.02], 0.0)

    def test_reject_consistent(self, rng):
        for _ in range(50):
            x = rng.standard_normal(20) + rng.uniform(-1, 1)
            res = t_test_mean(x, 0.0, alpha=0.1)
            assert res.reject == (res.p_value < 0.1)
            assert res.ci[0] <= res.ci[1]
            # CI excludes the target exactly when H0 is rejected
            assert res.reject == (not res.ci[0] <= 0.0 <= res.ci[1])


class TestSharpe:
    def test_identical_series(self, rng):
        x = rng.standard_normal(10)
        out = sharpe_diff_test(x, x.copy())
        assert isinstance(out, ExceptionalDegenerate)
        assert out.all_zero

    def test_constant_nonzero_difference(self, rng):
        x = rng.standard_normal(10)
        out = sharpe_diff_test(x + 0.5, x)
        assert isinstance(out, ExceptionalDegenerate)
        assert not out.all_zero

    def test_symmetric_differences(self):
        d = 0.01
        po = np.array([0.1, 0.2, 0.3, 0.4])
        out = sharpe_diff_test(po + np.array([d, -d, d, -d]), po)
        assert isinstance(out, TestResult)
        assert out.statistic == pytest.approx(0.0, abs=1e-12)
        assert out.p_value == pytest.approx(1.0, abs=1e-12)
        assert not out.reject

    def test_two_pass_oracle(self):
        diff = [0.01, -0.01, 0.02, -0.02, 0.01]
        m, sd = mean_sd_two_pass(diff)
        out = sharpe_diff_test(diff, [0.0] * 5)
        assert sharpe_ratio(diff, [0.0] * 5) == pytest.approx(m / sd, rel=1e-13)
        assert out.statistic == pytest.approx(m / sd * math.sqrt(5), rel=1e-13)
        assert out.df == 4
        assert out.p_value == pytest.approx(0.7989658591927786, abs=1e-12)

    def test_antisymmetry(self, rng):
        a, b = rng.standard_normal(30), rng.standard_normal(30)
        assert sharpe_diff_test(a, b).statistic == -sharpe_diff_test(b, a).statistic

    def test_ci_is_for_ratio(self, rng):
        a, b = rng.standard_normal(40), rng.standard_normal(40)
        out = sharpe_diff_test(a, b, alpha=0.05)
        sr = sharpe_ratio(a, b)
        assert out.ci[0] < sr < out.ci[1]
        assert (out.ci[0] + out.ci[1]) / 2 == pytest.approx(sr, abs=1e-15)


def test_evaluate_report(rng):
    rs = rng.standard_normal(40) * 0.01 + 0.005
    po = rng.standard_normal(40) * 0.01 + 0.005
    rep = evaluate(rs, po, 0.005)
    assert rep.S_value >= 0
    assert rep.T_eval == 40
    assert rep.sharpe_ratio == pytest.approx(mean_sd_two_pass(rs - po)[0] / mean_sd_two_pass(rs - po)[1])
    d = rep.to_dict()
    assert set(d) == {"S_value", "T_eval", "mean_test", "sharpe_ratio", "sharpe_test"}
