"""Cholesky factorization with explicit pivot control."""

from __future__ import annotations

import math

import numpy as np

from .errors import NotPositiveDefinite


def cholesky_pivots(m, tol: float = 0.0) -> tuple[np.ndarray, np.ndarray, bool]:
    """Attempt ``m = L L^T`` column by column.

    Returns ``(L, pivots, ok)``. ``pivots[k]`` is the diagonal remainder
    ``m[k, k] - sum_j L[k, j]**2`` taken before the square root; the
    factorization stops at the first pivot ``<= tol`` and ``ok`` is False.
    Only the lower triangle of ``m`` is read.
    """
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    L = np.zeros((n, n))
    pivots = np.full(n, np.nan)
    for k in range(n):
        d = a[k, k] - L[k, :k] @ L[k, :k]
        pivots[k] = d
        if not d > tol:
            return L, pivots[: k + 1], False
        L[k, k] = math.sqrt(d)
        L[k + 1 :, k] = (a[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / L[k, k]
    return L, pivots, True


def cholesky(m, tol: float | None = None) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    The default pivot tolerance is ``1e-10 * max(diag(m))``.
    Raises NotPositiveDefinite when any pivot falls at or below it.
    """
    a = np.asarray(m, dtype=float)
    if tol is None:
        diag = np.diag(a) if a.ndim == 2 else np.zeros(0)
        tol = 1e-10 * max(float(diag.max()) if diag.size else 0.0, 0.0)
    L, pivots, ok = cholesky_pivots(a, tol)
    if not ok:
        raise NotPositiveDefinite(
            f"pivot {len(pivots) - 1} is {pivots[-1]:.6g} (tolerance {tol:.6g})"
        )
    return L
