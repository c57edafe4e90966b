"""Correlated normal return panels with known moments.

Draws use numpy's ``Generator(PCG64(seed))`` and its ``standard_normal``
(ziggurat) transform, so a seed pins the panel bit for bit on a given numpy
version. The joint vector ``(r_rs, r_1, ..., r_N)`` is ``mean + L z`` with
``L`` the Cholesky factor of the joint covariance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._linalg import cholesky
from .data_ingest import AlignedPanel
from .errors import NotPositiveDefinite, ParseError
from .estimation import MomentEstimates

__all__ = ["MarketSpec", "cholesky", "generate_panel", "joint_covariance", "load_market_spec"]


@dataclass(frozen=True)
class MarketSpec:
    mu_true: np.ndarray
    sigma_true: np.ndarray
    mu_rs_true: float
    var_rs_true: float
    corr_rs: np.ndarray
    seed: int = 0
    T: int = 250
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        mu = np.array(self.mu_true, dtype=float)
        sigma = np.array(self.sigma_true, dtype=float)
        corr = np.array(self.corr_rs, dtype=float)
        n = mu.shape[0] if mu.ndim == 1 else -1
        if n < 2 or sigma.shape != (n, n) or corr.shape != (n,):
            raise ValueError(
                f"inconsistent shapes: mu {mu.shape}, sigma {sigma.shape}, corr_rs {corr.shape}"
            )
        if np.any(np.abs(corr) > 1.0):
            raise ValueError("corr_rs entries must lie in [-1, 1]")
        if not (self.var_rs_true >= 0.0 and math.isfinite(self.var_rs_true)):
            raise ValueError("var_rs_true must be finite and nonnegative")
        if int(self.T) < 3:
            raise ValueError(f"T must be at least 3, got {self.T}")
        for name, arr in (("mu_true", mu), ("sigma_true", sigma), ("corr_rs", corr)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "seed", int(self.seed))
        labels = tuple(self.labels) or tuple(f"s{i + 1}" for i in range(n))
        if len(labels) != n:
            raise ValueError("one label per security required")
        object.__setattr__(self, "labels", labels)

    @property
    def N(self) -> int:
        return self.mu_true.shape[0]

    def true_moments(self) -> MomentEstimates:
        """Population moments in estimation form, for weights free of sampling error."""
        return MomentEstimates.from_true(
            self.mu_true, self.sigma_true, self.mu_rs_true, self.var_rs_true, self.labels
        )

    def with_seed(self, seed: int, T: int | None = None) -> "MarketSpec":
        return MarketSpec(self.mu_true, self.sigma_true, self.mu_rs_true, self.var_rs_true,
                          self.corr_rs, seed, self.T if T is None else T, self.labels)


def joint_covariance(spec: MarketSpec) -> np.ndarray:
    """(N+1) x (N+1) covariance with the reference in row/column 0."""
    n = spec.N
    sd_rs = math.sqrt(spec.var_rs_true)
    sd = np.sqrt(np.clip(np.diag(spec.sigma_true), 0.0, None))
    cov = np.empty((n + 1, n + 1))
    cov[0, 0] = spec.var_rs_true
    cross = spec.corr_rs * sd_rs * sd
    cov[0, 1:] = cross
    cov[1:, 0] = cross
    cov[1:, 1:] = spec.sigma_true
    return cov


def generate_panel(spec: MarketSpec) -> AlignedPanel:
    # validate sigma_true alone first so its failure is reported as such
    try:
        cholesky(spec.sigma_true)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"sigma_true is not positive definite: {exc}") from None
    try:
        L = cholesky(joint_covariance(spec))
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"joint covariance is not positive definite: {exc}") from None
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    z = rng.standard_normal((spec.T, spec.N + 1))
    mean = np.concatenate([[spec.mu_rs_true], spec.mu_true])
    draws = mean + z @ L.T
    width = len(str(spec.T))
    keys = [f"t{t:0{width}d}" for t in range(1, spec.T + 1)]
    return AlignedPanel(keys, draws[:, 0], draws[:, 1:], spec.labels, "reference")


def market_spec_from_dict(data: dict) -> MarketSpec:
    required = ("mu_true", "sigma_true", "mu_rs_true", "var_rs_true", "corr_rs")
    missing = [k for k in required if k not in data]
    if missing:
        raise ParseError(f"market spec missing fields {missing}")
    try:
        return MarketSpec(
            mu_true=data["mu_true"],
            sigma_true=data["sigma_true"],
            mu_rs_true=float(data["mu_rs_true"]),
            var_rs_true=float(data["var_rs_true"]),
            corr_rs=data["corr_rs"],
            seed=int(data.get("seed", 0)),
            T=int(data.get("T", 250)),
            labels=tuple(data.get("labels", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid market spec: {exc}") from None


def load_market_spec(path) -> MarketSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: market spec must be a JSON object")
    return market_spec_from_dict(data)
