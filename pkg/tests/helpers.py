"""Independent reference implementations used as test oracles.

These deliberately share no code with the production paths they check:
the SVM dual is solved by projected gradient with an exact simplex-style
projection, GP means by a direct dense solve, and trajectory subsampling by
a plain greedy walk.
"""

from __future__ import annotations

import numpy as np


def rbf(A, B, gamma):
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-gamma * d2)


def _project_box_hyperplane(v, y, C):
    """Euclidean projection of v onto {0 <= a <= C, y.a = 0} by bisection."""

    def g(lam):
        return float(y @ np.clip(v - lam * y, 0.0, C))

    lo, hi = -(np.abs(v).max() + C + 1.0), np.abs(v).max() + C + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, C)


def svm_dual_reference(X, y, C, gamma, iters=400_000, tol=1e-14):
    """Projected-gradient solve of the soft-margin dual, to tight tolerance.

    Returns (alpha, bias); y must be +-1. Decision value at P:
    rbf(P, X, gamma) @ (alpha * y) + bias.
    """
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    n = len(y)
    K = rbf(X, X, gamma)
    Q = K * np.outer(y, y)
    L = float(np.linalg.eigvalsh(Q)[-1])
    step = 1.0 / max(L, 1e-12)
    alpha = _project_box_hyperplane(np.zeros(n), y, C)
    for _ in range(iters):
        grad = Q @ alpha - 1.0
        new = _project_box_hyperplane(alpha - step * grad, y, C)
        if np.abs(new - alpha).max() < tol:
            alpha = new
            break
        alpha = new
    u = K @ (alpha * y)
    free = (alpha > 1e-8 * C) & (alpha < C * (1 - 1e-8))
    if free.any():
        bias = float(np.mean(y[free] - u[free]))
    else:
        up = ((y > 0) & (alpha < C - 1e-12)) | ((y < 0) & (alpha > 1e-12))
        low = ((y > 0) & (alpha > 1e-12)) | ((y < 0) & (alpha < C - 1e-12))
        lo = np.max(y[up] - u[up]) if up.any() else -np.inf
        hi = np.min(y[low] - u[low]) if low.any() else np.inf
        bias = float(0.5 * (lo + hi))
    return alpha, bias


def gp_mean_reference(X, y, Xq, signal_var, length_scale, noise_var):
    """Posterior mean by one dense linear solve (no Cholesky, no caching)."""
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    m0 = y.mean()
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    K = signal_var * np.exp(-d2 / (2 * length_scale**2)) + noise_var * np.eye(len(y))
    w = np.linalg.solve(K, y - m0)
    d2q = ((np.asarray(Xq, float)[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    kq = signal_var * np.exp(-d2q / (2 * length_scale**2))
    return m0 + kq @ w


def greedy_walk(points, spacing):
    """Brute-force spaced subsampling: indices of emitted points."""
    pts = np.asarray(points, float)
    out = [0]
    last = pts[0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - last) >= spacing:
            out.append(i)
            last = pts[i]
    return out
