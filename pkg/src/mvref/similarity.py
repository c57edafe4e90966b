"""Similarity of a portfolio to the reference security.

Three quantities are reported for a portfolio return series:

* ``S``, the mean squared deviation of portfolio returns from the reference
  mean (divisor T);
* a one-sample Student t-test of the portfolio mean against that target;
* a test that the Sharpe ratio of ``reference - portfolio`` is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .data_ingest import ReturnSeries
from .errors import EmptySeries, LengthMismatch, ZeroVariance

# sd below this fraction of the largest |value| is treated as exactly zero
DEGENERATE_RTOL = 1e-12


def t_cdf(x: float, df: float) -> float:
    """Student t cumulative distribution function.

    Evaluated through the regularized incomplete beta function, choosing the
    argument that avoids cancellation: ``x**2/(df+x**2)`` when ``x**2 < df``
    and ``df/(df+x**2)`` otherwise.
    """
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    x = float(x)
    if math.isnan(x):
        return math.nan
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    x2 = x * x
    if x2 < df:
        half_body = 0.5 * special.betainc(0.5, 0.5 * df, x2 / (df + x2))
        return 0.5 + half_body if x >= 0 else 0.5 - half_body
    tail = 0.5 * special.betainc(0.5 * df, 0.5, df / (df + x2))
    return 1.0 - tail if x >= 0 else tail


def t_sf_two_sided(stat: float, df: float) -> float:
    """P(|T| >= |stat|) for T ~ t(df)."""
    return min(1.0, 2.0 * t_cdf(-abs(stat), df))


def t_ppf(p: float, df: float) -> float:
    """Quantile of the t distribution."""
    return float(special.stdtrit(df, p))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    df: int
    p_value: float
    ci: tuple[float, float]
    reject: bool
    alpha: float

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "ci": list(self.ci),
            "reject": self.reject,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class ExceptionalDegenerate:
    """The difference series has zero spread, so no Sharpe ratio exists.

    ``all_zero`` marks perfect replication (every difference is zero).
    """

    all_zero: bool
    mean_diff: float

    def to_dict(self) -> dict:
        return {
            "kind": "ExceptionalDegenerate",
            "all_zero": self.all_zero,
            "mean_diff": self.mean_diff,
        }


SharpeOutcome = Union[TestResult, ExceptionalDegenerate]


@dataclass(frozen=True)
class SimilarityReport:
    S_value: float
    mean_test: TestResult
    sharpe_test: SharpeOutcome
    sharpe_ratio: float | None
    T_eval: int

    @property
    def degenerate(self) -> bool:
        return isinstance(self.sharpe_test, ExceptionalDegenerate)

    def to_dict(self) -> dict:
        return {
            "S_value": self.S_value,
            "T_eval": self.T_eval,
            "mean_test": self.mean_test.to_dict(),
            "sharpe_ratio": self.sharpe_ratio,
            "sharpe_test": self.sharpe_test.to_dict(),
        }


def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, ReturnSeries) else x, dtype=float)


def _is_zero_spread(sd: float, x: np.ndarray) -> bool:
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    return sd == 0.0 or sd <= DEGENERATE_RTOL * scale


def compute_S(po, mu_rs: float) -> float:
    """Mean squared deviation of portfolio returns from ``mu_rs`` (divisor T)."""
    r = _values(po)
    if r.size == 0:
        raise EmptySeries("S needs at least one period")
    dev = r - mu_rs
    return float(dev @ dev / r.size)


def _mean_sd(x: np.ndarray) -> tuple[float, float]:
    mean = float(x.mean())
    return mean, float(np.sqrt(((x - mean) ** 2).sum() / (x.size - 1)))


def t_test_mean(po, mu_rs: float, alpha: float = 0.05) -> TestResult:
    """Two-sided one-sample t-test of H0: mean(po) == mu_rs."""
    x = _values(po)
    T = x.size
    if T < 3:
        raise EmptySeries(f"t-test needs T >= 3, got {T}")
    mean, sd = _mean_sd(x)
    if _is_zero_spread(sd, x):
        raise ZeroVariance("portfolio returns are constant; t statistic undefined")
    se = sd / math.sqrt(T)
    stat = (mean - mu_rs) / se
    df = T - 1
    p = t_sf_two_sided(stat, df)
    half = t_ppf(1.0 - alpha / 2.0, df) * se
    return TestResult(stat, df, p, (mean - half, mean + half), p < alpha, alpha)


def _sharpe(rs, po, alpha: float) -> tuple[SharpeOutcome, float | None]:
    a, b = _values(rs), _values(po)
    if a.shape != b.shape:
        raise LengthMismatch(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 3:
        raise EmptySeries(f"Sharpe test needs T >= 3, got {a.size}")
    diff = a - b
    T = diff.size
    mean, sd = _mean_sd(diff)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if sd == 0.0 or sd <= DEGENERATE_RTOL * scale:
        all_zero = bool(np.max(np.abs(diff)) <= DEGENERATE_RTOL * scale)
        return ExceptionalDegenerate(all_zero=all_zero, mean_diff=mean), None
    ratio = mean / sd
    stat = ratio * math.sqrt(T)
    df = T - 1
    p = t_sf_two_sided(stat, df)
    half = t_ppf(1.0 - alpha / 2.0, df) / math.sqrt(T)
    return TestResult(stat, df, p, (ratio - half, ratio + half), p < alpha, alpha), ratio


def sharpe_diff_test(rs, po, alpha: float = 0.05) -> SharpeOutcome:
    """Test H0: Sharpe ratio of ``rs - po`` equals zero.

    The ratio is ``mean(diff) / sd(diff)`` and the statistic ``ratio * sqrt(T)``
    with T-1 degrees of freedom. The confidence interval is for the ratio.
    A difference series with zero spread yields ExceptionalDegenerate.
    """
    return _sharpe(rs, po, alpha)[0]


def sharpe_ratio(rs, po) -> float | None:
    """mean/sd of ``rs - po``; None when the spread is zero."""
    return _sharpe(rs, po, 0.05)[1]


def evaluate(rs, po, mu_rs: float, alpha: float = 0.05) -> SimilarityReport:
    """Compute S and run both tests on aligned reference/portfolio series."""
    b = _values(po)
    sharpe, ratio = _sharpe(rs, b, alpha)
    return SimilarityReport(
        S_value=compute_S(b, mu_rs),
        mean_test=t_test_mean(b, mu_rs, alpha),
        sharpe_test=sharpe,
        sharpe_ratio=ratio,
        T_eval=int(b.size),
    )
