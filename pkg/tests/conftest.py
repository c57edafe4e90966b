import json

import numpy as np
import pytest

from mvref import MarketSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, header, rows):
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def market():
    sigma = np.array(
        [
            [0.00040, 0.00012, 0.00005],
            [0.00012, 0.00090, -0.00010],
            [0.00005, -0.00010, 0.00160],
        ]
    )
    return MarketSpec(
        mu_true=[0.004, 0.007, 0.011],
        sigma_true=sigma,
        mu_rs_true=0.008,
        var_rs_true=0.0006,
        corr_rs=[0.4, -0.2, 0.0],
        seed=7,
        T=500,
    )


@pytest.fixture
def market_file(tmp_path, market):
    path = tmp_path / "market.json"
    path.write_text(
        json.dumps(
            {
                "mu_true": market.mu_true.tolist(),
                "sigma_true": market.sigma_true.tolist(),
                "mu_rs_true": market.mu_rs_true,
                "var_rs_true": market.var_rs_true,
                "corr_rs": market.corr_rs.tolist(),
                "seed": market.seed,
                "T": market.T,
            }
        ),
        encoding="utf-8",
    )
    return path


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
