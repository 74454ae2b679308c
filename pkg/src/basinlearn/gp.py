"""Gaussian-process regression over unit state space.

Predicts how many spaced samples a trajectory launched from a state would
yield ("remaining length"), which breaks ties among candidates that sit
equally close to the decision boundary. Only the posterior mean is consumed.

Stationary squared-exponential kernel, prior mean equal to the empirical
target mean (lengths are positive; extrapolation should revert to a typical
length, not zero). Hyper-parameters come from a deterministic coarse grid
search on the log marginal likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import TrainingError

TRAINING_CAP = 1000

LENGTH_SCALES = (0.05, 0.1, 0.2, 0.4)
SIGNAL_VAR_FACTORS = (0.5, 1.0, 2.0)
NOISE_VAR_FACTORS = (1e-4, 1e-2)

_JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class GpHypers:
    signal_var: float
    length_scale: float
    noise_var: float


@dataclass
class GpModel:
    """Fitted regressor; immutable and safe for concurrent prediction."""

    training_inputs: np.ndarray  # (n, d)
    training_targets: np.ndarray  # (n,)
    hypers: GpHypers
    prior_mean: float
    _alpha: np.ndarray  # (K + sn2 I)^-1 (y - m0)


def _sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)


def _kernel(D2: np.ndarray, hypers: GpHypers) -> np.ndarray:
    return hypers.signal_var * np.exp(-D2 / (2.0 * hypers.length_scale**2))


def _chol_with_jitter(Kn: np.ndarray):
    for jit in _JITTERS:
        try:
            return cho_factor(Kn + jit * np.eye(len(Kn)), lower=True)
        except np.linalg.LinAlgError:
            continue
    raise TrainingError("kernel matrix not positive definite after jitter escalation")


def _log_marginal_likelihood(D2: np.ndarray, r: np.ndarray, hypers: GpHypers) -> float:
    n = len(r)
    Kn = _kernel(D2, hypers) + hypers.noise_var * np.eye(n)
    try:
        L = cho_factor(Kn, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf
    alpha = cho_solve(L, r)
    logdet = 2.0 * np.log(np.diag(L[0])).sum()
    return float(-0.5 * (r @ alpha) - 0.5 * logdet - 0.5 * n * np.log(2.0 * np.pi))


def gp_fit(
    inputs: np.ndarray,
    targets: np.ndarray,
    hypers: GpHypers | None = None,
    rng: np.random.Generator | None = None,
    cap: int = TRAINING_CAP,
) -> GpModel:
    """Fit on unit states and their remaining-length targets.

    With ``hypers=None`` the grid search maximizes log marginal likelihood
    over length scale x signal variance x noise variance (variance factors
    scale with var(y); unit scale when the targets are constant). Training
    sets larger than ``cap`` are subsampled uniformly at random (seeded
    generator; predictions only rank candidates).
    """
    X = np.ascontiguousarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float).ravel()
    if X.ndim != 2 or len(X) != len(y) or len(y) < 1:
        raise TrainingError("need at least one (input, target) pair")

    if len(y) > cap:
        gen = rng if rng is not None else np.random.default_rng(0)
        keep = np.sort(gen.choice(len(y), size=cap, replace=False))
        X = X[keep]
        y = y[keep]

    m0 = float(y.mean())
    r = y - m0
    D2 = _sqdist(X, X)

    if hypers is None:
        var = float(y.var())
        scale = var if var > 0 else 1.0
        best = None
        best_lml = -np.inf
        for ell in LENGTH_SCALES:
            for sf in SIGNAL_VAR_FACTORS:
                for sn in NOISE_VAR_FACTORS:
                    cand = GpHypers(sf * scale, ell, sn * scale)
                    lml = _log_marginal_likelihood(D2, r, cand)
                    if lml > best_lml:
                        best_lml = lml
                        best = cand
        if best is None:
            raise TrainingError("no hyper-parameter candidate factorized")
        hypers = best

    Kn = _kernel(D2, hypers) + hypers.noise_var * np.eye(len(y))
    L = _chol_with_jitter(Kn)
    alpha = cho_solve(L, r)
    return GpModel(
        training_inputs=X,
        training_targets=y,
        hypers=hypers,
        prior_mean=m0,
        _alpha=alpha,
    )


def predict_mean(model: GpModel, u: np.ndarray) -> float | np.ndarray:
    """Posterior mean m0 + k*' (K + sn2 I)^-1 (y - m0).

    Far from every training input the prediction reverts to the prior mean.
    Accepts one state (d,) or a batch (n, d).
    """
    pts = np.asarray(u, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    kstar = _kernel(_sqdist(pts, model.training_inputs), model.hypers)
    vals = model.prior_mean + kstar @ model._alpha
    return float(vals[0]) if single else vals
