"""Minimum-variance portfolios that track a reference security's mean return."""

__version__ = "0.1.0"

from .data_ingest import AlignedPanel, ReturnSeries, align, load_panel, load_series
from .errors import MvrefError
from .estimation import MomentEstimates, estimate_moments
from .optimizer import (
    LinearSystem,
    OptimalPortfolio,
    build_linear_system,
    check_hessian,
    optimize,
    portfolio_returns,
    solve_optimal_weights,
)
from .similarity import (
    ExceptionalDegenerate,
    SimilarityReport,
    TestResult,
    compute_S,
    evaluate,
    sharpe_diff_test,
    t_cdf,
    t_test_mean,
)
from .simulate import MarketSpec, cholesky, generate_panel

__all__ = [
    "AlignedPanel", "ExceptionalDegenerate", "LinearSystem", "MarketSpec", "MomentEstimates",
    "MvrefError", "OptimalPortfolio", "ReturnSeries", "SimilarityReport", "TestResult",
    "align", "build_linear_system", "check_hessian", "cholesky", "compute_S", "estimate_moments",
    "evaluate", "generate_panel", "load_panel", "load_series", "optimize", "portfolio_returns",
    "sharpe_diff_test", "solve_optimal_weights", "t_cdf", "t_test_mean",
]
