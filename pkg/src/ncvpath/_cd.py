"""Compiled coordinate-descent sweep for the weighted least-squares subproblem."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def cd_sweeps(x, v, r, beta, a, tilt, thresh, ridge, tol, max_iter):
    """Cyclic coordinate descent, updating ``beta`` and residual ``r`` in place.

    Minimizes ``0.5*sum(v*(r0 - x@(beta-beta0))**2) + tilt@beta
    + sum(thresh*|beta|) + sum(ridge*beta**2)`` where ``r`` enters as the
    working residual at the starting ``beta``.  Coordinates with zero
    curvature are skipped.  Returns (sweeps, converged, skipped).
    """
    n, k = x.shape
    skipped = 0
    for j in range(k):
        if a[j] + 2.0 * ridge[j] <= 0.0:
            skipped += 1
    for it in range(max_iter):
        dmax = 0.0
        for j in range(k):
            denom = a[j] + 2.0 * ridge[j]
            if denom <= 0.0:
                continue
            g = 0.0
            for i in range(n):
                g += v[i] * x[i, j] * r[i]
            bj = beta[j]
            rho = g + a[j] * bj - tilt[j]
            c = thresh[j]
            if rho > c:
                new = (rho - c) / denom
            elif rho < -c:
                new = (rho + c) / denom
            else:
                new = 0.0
            delta = new - bj
            if delta != 0.0:
                for i in range(n):
                    r[i] -= delta * x[i, j]
                beta[j] = new
                ad = abs(delta)
                if ad > dmax:
                    dmax = ad
        if dmax < tol:
            return it + 1, True, skipped
    return max_iter, False, skipped


@njit(cache=True, nogil=True)
def cd_sweeps_gram(gram, g, beta, a, tilt, thresh, ridge, tol, max_iter):
    """Covariance form of :func:`cd_sweeps` for a fixed weight vector.

    ``gram = X.T @ diag(v) @ X`` and ``g = X.T @ (v*r)`` is the weighted
    correlation with the current residual, updated in place along with
    ``beta``.  A sweep costs ``O(k**2)`` instead of ``O(n*k)``.
    """
    k = beta.shape[0]
    skipped = 0
    for j in range(k):
        if a[j] + 2.0 * ridge[j] <= 0.0:
            skipped += 1
    for it in range(max_iter):
        dmax = 0.0
        for j in range(k):
            denom = a[j] + 2.0 * ridge[j]
            if denom <= 0.0:
                continue
            bj = beta[j]
            rho = g[j] + a[j] * bj - tilt[j]
            c = thresh[j]
            if rho > c:
                new = (rho - c) / denom
            elif rho < -c:
                new = (rho + c) / denom
            else:
                new = 0.0
            delta = new - bj
            if delta != 0.0:
                for i in range(k):
                    g[i] -= delta * gram[i, j]
                beta[j] = new
                ad = abs(delta)
                if ad > dmax:
                    dmax = ad
        if dmax < tol:
            return it + 1, True, skipped
    return max_iter, False, skipped


def warmup():
    """Trigger compilation on a tiny problem."""
    x = np.asfortranarray(np.ones((2, 1)))
    cd_sweeps(x, np.ones(2), np.ones(2), np.zeros(1), np.ones(1), np.zeros(1),
              np.zeros(1), np.zeros(1), 1e-8, 10)
    cd_sweeps_gram(np.ones((1, 1)), np.ones(1), np.zeros(1), np.ones(1), np.zeros(1),
                   np.zeros(1), np.zeros(1), 1e-8, 10)
