"""Sample moments of an aligned panel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_ingest import AlignedPanel
from .errors import ConfigError
from .similarity import t_ppf

DEFAULT_ALPHA = 0.05


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MomentEstimates:
    """Means and covariances of the accepted set plus reference statistics.

    ``mu_rs`` is the monitoring-cost-adjusted reference mean; ``mu_rs_ci``
    is shifted by the same amount.
    """

    mu: np.ndarray
    sigma: np.ndarray
    mu_rs: float
    var_rs: float
    T: int
    mu_rs_ci: tuple[float, float]
    monitoring_cost: float = 0.0
    alpha: float = DEFAULT_ALPHA
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", _readonly(self.mu))
        object.__setattr__(self, "sigma", _readonly(self.sigma))
        n = self.mu.shape[0]
        if self.mu.ndim != 1 or self.sigma.shape != (n, n):
            raise ValueError(f"mu {self.mu.shape} and sigma {self.sigma.shape} disagree")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"s{i + 1}" for i in range(n)))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def N(self) -> int:
        return self.mu.shape[0]

    @property
    def mu_rs_sample(self) -> float:
        """Reference sample mean before the monitoring-cost deduction."""
        return self.mu_rs + self.monitoring_cost

    @classmethod
    def from_true(cls, mu, sigma, mu_rs: float, var_rs: float = 0.0, labels=()) -> "MomentEstimates":
        """Wrap known population moments (no sampling error, degenerate CI)."""
        return cls(mu, sigma, float(mu_rs), float(var_rs), 0, (float(mu_rs), float(mu_rs)),
                   labels=tuple(labels))


def sample_covariance(x: np.ndarray) -> np.ndarray:
    """Unbiased covariance of the columns of ``x`` (T x N).

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric.
    """
    T, n = x.shape
    centered = x - x.mean(axis=0)
    cov = np.empty((n, n))
    for i in range(n):
        col = centered[:, i]
        row = centered[:, i:].T @ col / (T - 1)
        cov[i, i:] = row
        cov[i:, i] = row
    return cov


def estimate_moments(
    panel: AlignedPanel, alpha: float = DEFAULT_ALPHA, monitoring_cost: float = 0.0
) -> MomentEstimates:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if not (monitoring_cost >= 0.0 and math.isfinite(monitoring_cost)):
        raise ConfigError(f"monitoring_cost must be a finite nonnegative number, got {monitoring_cost}")
    T = panel.T
    mu = panel.accepted.mean(axis=0)
    sigma = sample_covariance(panel.accepted)

    ref = panel.reference
    raw_mean = float(ref.mean())
    var_rs = float(((ref - raw_mean) ** 2).sum() / (T - 1))
    mu_rs = raw_mean - monitoring_cost
    half = t_ppf(1.0 - alpha / 2.0, T - 1) * math.sqrt(var_rs / T)
    return MomentEstimates(
        mu=mu,
        sigma=sigma,
        mu_rs=mu_rs,
        var_rs=var_rs,
        T=T,
        mu_rs_ci=(mu_rs - half, mu_rs + half),
        monitoring_cost=float(monitoring_cost),
        alpha=alpha,
        labels=panel.labels,
    )
