import math

import numpy as np
import pytest

from mvref.data_ingest import format_panel_csv, load_panel
from mvref.errors import NotPositiveDefinite, ParseError
from mvref.estimation import estimate_moments
from mvref.optimizer import optimize, portfolio_returns
from mvref.simulate import MarketSpec, cholesky, generate_panel, joint_covariance, load_market_spec


class TestCholesky:
    def test_identity(self):
        assert np.array_equal(cholesky(np.eye(4)), np.eye(4))

    def test_two_by_two(self):
        assert cholesky([[4.0, 2.0], [2.0, 5.0]]).tolist() == [[2.0, 0.0], [1.0, 2.0]]

    def test_reconstruct(self, rng):
        g = rng.standard_normal((6, 6))
        m = g.T @ g + 1e-8 * np.eye(6)
        L = cholesky(m)
        assert np.allclose(np.triu(L, 1), 0.0)
        assert np.max(np.abs(L @ L.T - m)) <= 1e-12 * np.abs(m).max()

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky([[1.0, 2.0], [2.0, 1.0]])


class TestGenerate:
    def test_zero_sigma_rejected(self, market):
        spec = MarketSpec(np.zeros(3), np.zeros((3, 3)), 0.0, 1e-4, np.zeros(3))
        with pytest.raises(NotPositiveDefinite):
            generate_panel(spec)

    def test_joint_not_pd(self):
        spec = MarketSpec([0.0, 0.0], np.eye(2), 0.0, 1.0, [0.9, 0.9])
        with pytest.raises(NotPositiveDefinite, match="joint"):
            generate_panel(spec)

    def test_deterministic(self, market):
        a, b = generate_panel(market), generate_panel(market)
        assert np.array_equal(a.accepted, b.accepted)
        assert np.array_equal(a.reference, b.reference)
        assert not np.array_equal(a.accepted, generate_panel(market.with_seed(8)).accepted)

    def test_period_keys_sorted(self, market):
        panel = generate_panel(market.with_seed(1, 120))
        assert list(panel.period_keys) == sorted(panel.period_keys)
        assert panel.period_keys[0] == "t001"

    def test_reference_mean(self, market):
        T = 100_000
        panel = generate_panel(market.with_seed(11, T))
        bound = 4 * math.sqrt(market.var_rs_true / T)
        assert abs(panel.reference.mean() - market.mu_rs_true) < bound

    def test_zero_correlation(self, market):
        T = 100_000
        spec = MarketSpec(market.mu_true, market.sigma_true, 0.0, 1e-4, np.zeros(3), seed=3, T=T)
        panel = generate_panel(spec)
        for i in range(3):
            r = np.corrcoef(panel.reference, panel.accepted[:, i])[0, 1]
            assert abs(r) < 4 / math.sqrt(T)

    def test_moment_recovery(self, market):
        T = 100_000
        est = estimate_moments(generate_panel(market.with_seed(5, T)))
        se = np.sqrt(np.diag(market.sigma_true) / T)
        assert np.all(np.abs(est.mu - market.mu_true) < 5 * se)
        rel = np.linalg.norm(est.sigma - market.sigma_true) / np.linalg.norm(market.sigma_true)
        assert rel < 0.05

    def test_joint_correlation_signs(self, market):
        cov = joint_covariance(market)
        assert cov[0, 1] > 0 and cov[0, 2] < 0 and cov[0, 3] == 0

    def test_end_to_end_mean(self, market):
        port = optimize(market.true_moments())
        T = 20_000
        panel = generate_panel(market.with_seed(99, T))
        po = portfolio_returns(port.weights, panel).values
        se = math.sqrt(port.weights @ market.sigma_true @ port.weights / T)
        assert abs(po.mean() - market.mu_rs_true) < 5 * se

    def test_csv_round_trip(self, tmp_path, market):
        panel = generate_panel(market.with_seed(2, 50))
        path = tmp_path / "sim.csv"
        path.write_text(format_panel_csv(panel), encoding="utf-8")
        back = load_panel(path)
        assert back.period_keys == panel.period_keys
        assert np.array_equal(back.accepted, panel.accepted)
        assert np.array_equal(back.reference, panel.reference)


class TestSpecFile:
    def test_load(self, market_file, market):
        spec = load_market_spec(market_file)
        assert np.array_equal(spec.sigma_true, market.sigma_true)
        assert spec.seed == market.seed

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"mu_true": [0, 0]}', encoding="utf-8")
        with pytest.raises(ParseError):
            load_market_spec(path)

    def test_bad_shape(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            '{"mu_true": [0, 0], "sigma_true": [[1]], "mu_rs_true": 0, "var_rs_true": 1, "corr_rs": [0, 0]}',
            encoding="utf-8",
        )
        with pytest.raises(ParseError):
            load_market_spec(path)
