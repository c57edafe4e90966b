"""Minimum-variance portfolio with a pinned expected return.

Minimizes ``w' sigma w`` subject to ``w' mu = mu_rs`` and ``sum(w) = 1``,
short sales allowed. The Lagrangian

    L = w' sigma w - l1 (w' mu - mu_rs) - l2 (sum(w) - 1)

has first-order conditions ``2 sigma w - l1 mu - l2 1 = 0`` plus the two
constraints, giving the bordered (N+2) x (N+2) system ``A X = b`` with
``X = (w, l1, l2)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ._linalg import cholesky_pivots
from .data_ingest import AlignedPanel, ReturnSeries
from .errors import DegenerateCovariance, LengthMismatch, ResidualTooLarge, SingularSystem
from .estimation import MomentEstimates

logger = logging.getLogger(__name__)

PIVOT_RTOL = 1e-12
PD_RTOL = 1e-10
RESIDUAL_TOL = 1e-9
CONSTRAINT_TOL = 1e-10
# relative spread of mu below which mu is treated as a multiple of the ones vector
MU_SPREAD_RTOL = 1e-12


@dataclass(frozen=True)
class LinearSystem:
    A: np.ndarray
    b: np.ndarray
    N: int


@dataclass(frozen=True)
class HessianCheck:
    positive_definite: bool
    smallest_pivot: float
    tolerance: float

    def __bool__(self) -> bool:
        return self.positive_definite


@dataclass(frozen=True)
class OptimalPortfolio:
    weights: np.ndarray
    lambda1: float
    lambda2: float
    in_sample_variance: float
    in_sample_mean: float
    condition_estimate: float
    hessian_pd: bool
    hessian_min_pivot: float = float("nan")
    residual: float = 0.0
    labels: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "weights": [float(w) for w in self.weights],
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "in_sample_mean": self.in_sample_mean,
            "in_sample_variance": self.in_sample_variance,
        }


def build_linear_system(est: MomentEstimates) -> LinearSystem:
    n = est.N
    A = np.zeros((n + 2, n + 2))
    A[:n, :n] = 2.0 * est.sigma
    A[:n, n] = -est.mu
    A[:n, n + 1] = -1.0
    A[n, :n] = est.mu
    A[n + 1, :n] = 1.0
    b = np.zeros(n + 2)
    b[n] = est.mu_rs
    b[n + 1] = 1.0
    return LinearSystem(A, b, n)


def check_hessian(est_or_sigma) -> HessianCheck:
    """Cholesky test of ``H = 2 sigma``.

    Positive definite iff every pivot exceeds ``1e-10 * max(diag(H))``.
    Accepts MomentEstimates or a bare covariance matrix.
    """
    sigma = est_or_sigma.sigma if isinstance(est_or_sigma, MomentEstimates) else est_or_sigma
    H = 2.0 * np.asarray(sigma, dtype=float)
    diag = np.diag(H)
    tol = PD_RTOL * max(float(diag.max()), 0.0) if diag.size else 0.0
    _, pivots, ok = cholesky_pivots(H, tol)
    if ok and not np.allclose(H, H.T, rtol=0.0, atol=tol):
        # the factorization reads the lower triangle only
        ok = False
    smallest = float(np.min(pivots)) if pivots.size else float("nan")
    return HessianCheck(ok, smallest, tol)


def _check_mu_direction(est: MomentEstimates) -> None:
    mu = est.mu
    scale = max(float(np.max(np.abs(mu))), abs(est.mu_rs))
    spread = float(np.ptp(mu))
    if spread > MU_SPREAD_RTOL * scale and spread > 0.0:
        return
    common = float(mu.mean())
    if abs(est.mu_rs - common) <= MU_SPREAD_RTOL * max(scale, 1e-300):
        raise SingularSystem(
            f"redundant constraint: every expected return equals {common:.17g}, "
            "the return constraint repeats the budget constraint"
        )
    raise SingularSystem(
        f"infeasible: every expected return equals {common:.17g}, "
        f"so no portfolio attains mu_rs = {est.mu_rs:.17g}"
    )


def solve_optimal_weights(sys: LinearSystem, est: MomentEstimates) -> OptimalPortfolio:
    """Solve ``A X = b`` by LU with partial pivoting and verify the result.

    Raises DegenerateCovariance when ``2 sigma`` fails the Cholesky test,
    SingularSystem when the constraint rows are dependent or an LU pivot is
    below ``1e-12 * max|A|``, and ResidualTooLarge when the solution misses
    the system or either constraint beyond tolerance.
    """
    n = sys.N
    if n != est.N:
        raise LengthMismatch(f"system has N={n} but estimates have N={est.N}")
    hess = check_hessian(est)
    if not hess.positive_definite:
        raise DegenerateCovariance(
            f"2*sigma is not positive definite (smallest Cholesky pivot "
            f"{hess.smallest_pivot:.6g}, tolerance {hess.tolerance:.6g})"
        )
    _check_mu_direction(est)

    A, b = sys.A, sys.b
    amax = float(np.max(np.abs(A)))
    lu, piv = linalg.lu_factor(A, check_finite=True)
    min_pivot = float(np.min(np.abs(np.diag(lu))))
    if min_pivot < PIVOT_RTOL * amax:
        raise SingularSystem(f"LU pivot {min_pivot:.3g} below {PIVOT_RTOL:g} * max|A| = {amax:.3g}")
    X = linalg.lu_solve((lu, piv), b)
    # one step of iterative refinement
    X = X + linalg.lu_solve((lu, piv), b - A @ X)

    residual = float(np.max(np.abs(A @ X - b)))
    bound = RESIDUAL_TOL * max(1.0, float(np.max(np.abs(b))))
    if residual > bound:
        raise ResidualTooLarge(f"||AX - b||_inf = {residual:.3g} exceeds {bound:.3g}")

    w = X[:n].copy()
    budget_err = abs(float(w.sum()) - 1.0)
    return_err = abs(float(w @ est.mu) - est.mu_rs)
    if budget_err > CONSTRAINT_TOL or return_err > CONSTRAINT_TOL:
        raise ResidualTooLarge(
            f"constraints violated after solve: |sum w - 1| = {budget_err:.3g}, "
            f"|w'mu - mu_rs| = {return_err:.3g}"
        )
    anorm = float(np.max(np.sum(np.abs(A), axis=0)))
    rcond, _ = linalg.lapack.dgecon(lu, anorm, norm="1")
    w.setflags(write=False)
    variance = max(float(w @ est.sigma @ w), 0.0)
    logger.debug("solved N=%d, residual %.3g, rcond %.3g", n, residual, rcond)
    return OptimalPortfolio(
        weights=w,
        lambda1=float(X[n]),
        lambda2=float(X[n + 1]),
        in_sample_variance=variance,
        in_sample_mean=float(w @ est.mu),
        condition_estimate=float(rcond),
        hessian_pd=True,
        hessian_min_pivot=hess.smallest_pivot,
        residual=residual,
        labels=est.labels,
    )


def optimize(est: MomentEstimates) -> OptimalPortfolio:
    return solve_optimal_weights(build_linear_system(est), est)


def portfolio_returns(weights, panel: AlignedPanel, label: str = "portfolio") -> ReturnSeries:
    w = np.asarray(weights, dtype=float)
    if w.shape != (panel.N,):
        raise LengthMismatch(f"{w.size} weights for {panel.N} securities")
    return ReturnSeries(label, panel.period_keys, panel.accepted @ w)
