"""Binary soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The decision surface is the running estimate of the basin boundary; the
magnitude of the decision value is the margin proxy that ranks candidates for
active selection. Training solves the standard dual

    min 0.5 a'Qa - e'a,  0 <= a_i <= C,  sum_i y_i a_i = 0,   Q_ij = y_i y_j k(x_i, x_j)

with pairwise updates on the maximal-KKT-violating pair until the violation
drops below tolerance. For large problems the violating pair is completed by
the partner with the largest guaranteed objective decrease (same stopping
rule, far fewer iterations); small problems use the plain first-order pair,
whose update path is exactly equivariant under class relabeling and sample
permutation.

Everything internal works in "signed dual" space ah_i = y_i * a_i, where the
equality constraint is sum ah = 0 and the gradient is K @ ah - y.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import TrainingError
from .trajectory_sampling import LabeledSample

# Below this training size the plain first-order pair selection is used.
SECOND_ORDER_MIN_N = 2001

DEFAULT_C = 10.0
DEFAULT_GAMMA = 100.0


@dataclass(frozen=True)
class RbfKernel:
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class SvmModel:
    """Fitted classifier; immutable after construction, safe to share."""

    support_vectors: np.ndarray  # (s, d) unit coordinates
    dual_coefficients: np.ndarray  # (s,) signed alpha_i * y_i
    bias: float
    kernel: RbfKernel
    c: float
    labels: tuple[int, int]  # (negative-class id, positive-class id)
    kkt_violation: float = 0.0
    n_iter: int = 0


@njit(cache=True)
def _rbf_gram(X, gamma):
    n, d = X.shape
    K = np.empty((n, n))
    for i in range(n):
        K[i, i] = 1.0
        for j in range(i + 1, n):
            s = 0.0
            for t in range(d):
                diff = X[i, t] - X[j, t]
                s += diff * diff
            v = np.exp(-gamma * s)
            K[i, j] = v
            K[j, i] = v
    return K


@njit(cache=True)
def _rbf_cross(A, B, gamma, out):
    na, d = A.shape
    nb = B.shape[0]
    for i in range(na):
        for j in range(nb):
            s = 0.0
            for t in range(d):
                diff = A[i, t] - B[j, t]
                s += diff * diff
            out[i, j] = np.exp(-gamma * s)
    return out


def rbf_cross(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel block k(A_i, B_j); same elementwise arithmetic as the Gram path."""
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    out = np.empty((len(A), len(B)))
    return _rbf_cross(A, B, gamma, out)


@njit(cache=True)
def _lex_less(X, a, b):
    """Order samples by coordinates; the tie-break must not depend on storage
    order, or shuffling the training set would change the optimization path."""
    for t in range(X.shape[1]):
        if X[a, t] < X[b, t]:
            return True
        if X[a, t] > X[b, t]:
            return False
    return False


@njit(cache=True)
def _smo(K, X, n, y, C, tol, max_iter, second_order):
    """Pairwise dual ascent; returns (ah, bias, iterations, final violation).

    K may be larger than (n, n); only the leading n rows/columns are read, so
    campaigns can hand over their capacity-sized Gram buffer without copying.
    """
    ah = np.zeros(n)
    G = -y.copy()  # gradient of 0.5 ah'K ah - y'ah
    it = 0
    while it < max_iter:
        gmax = -1e300
        i = -1
        for t in range(n):
            ub = C if y[t] > 0.0 else 0.0
            if ah[t] < ub:
                v = -G[t]
                if v > gmax or (v == gmax and i >= 0 and _lex_less(X, t, i)):
                    gmax = v
                    i = t
        gmin = 1e300
        jmin = -1
        for t in range(n):
            lb = 0.0 if y[t] > 0.0 else -C
            if ah[t] > lb:
                v = -G[t]
                if v < gmin or (v == gmin and jmin >= 0 and _lex_less(X, t, jmin)):
                    gmin = v
                    jmin = t
        if i < 0 or jmin < 0 or gmax - gmin < tol:
            break
        if second_order:
            j = -1
            best = 0.0
            Kii = K[i, i]
            for t in range(n):
                lb = 0.0 if y[t] > 0.0 else -C
                if ah[t] > lb:
                    gap = gmax + G[t]
                    if gap > 0.0:
                        quad = Kii + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0.0:
                            quad = 1e-12
                        gain = gap * gap / quad
                        if gain > best or (gain == best and j >= 0 and _lex_less(X, t, j)):
                            best = gain
                            j = t
            if j < 0:
                j = jmin
        else:
            j = jmin
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        d = (G[j] - G[i]) / quad  # step: ah_i += d, ah_j -= d
        ubi = C if y[i] > 0.0 else 0.0
        lbi = 0.0 if y[i] > 0.0 else -C
        ubj = C if y[j] > 0.0 else 0.0
        lbj = 0.0 if y[j] > 0.0 else -C
        if ah[i] + d > ubi:
            d = ubi - ah[i]
        if ah[i] + d < lbi:
            d = lbi - ah[i]
        if ah[j] - d < lbj:
            d = ah[j] - lbj
        if ah[j] - d > ubj:
            d = ah[j] - ubj
        ah[i] += d
        ah[j] -= d
        for t in range(n):
            G[t] += d * (K[i, t] - K[j, t])
        it += 1

    # Bias: average over free support vectors, else midpoint of the feasible
    # interval [max over up-set, min over down-set] of -G.
    sb = 0.0
    nb = 0
    for t in range(n):
        a = ah[t] if ah[t] >= 0.0 else -ah[t]
        if 0.0 < a < C:
            sb += -G[t]
            nb += 1
    gmax = -1e300
    gmin = 1e300
    for t in range(n):
        ub = C if y[t] > 0.0 else 0.0
        lb = 0.0 if y[t] > 0.0 else -C
        if ah[t] < ub and -G[t] > gmax:
            gmax = -G[t]
        if ah[t] > lb and -G[t] < gmin:
            gmin = -G[t]
    bias = sb / nb if nb > 0 else 0.5 * (gmax + gmin)
    return ah, bias, it, gmax - gmin


def svm_fit(
    states: np.ndarray,
    labels: np.ndarray,
    c: float = DEFAULT_C,
    gamma: float = DEFAULT_GAMMA,
    tol: float = 1e-4,
    max_iter: int = 10**5,
    gram: np.ndarray | None = None,
) -> SvmModel:
    """Train on unit states with binary attractor labels.

    ``gram``, when given, must be the RBF Gram matrix of ``states`` at this
    gamma (campaigns grow it incrementally); it is only a computation cache
    and never changes the result.
    """
    X = np.ascontiguousarray(states, dtype=float)
    lab = np.asarray(labels)
    if X.ndim != 2 or len(X) != len(lab):
        raise TrainingError("states must be (n, d) with one label per row")
    if c <= 0:
        raise TrainingError("C must be positive")
    classes = np.unique(lab)
    if len(classes) < 2:
        raise TrainingError("training needs both classes present")
    if len(classes) > 2:
        raise TrainingError("binary classifier: more than two labels supplied")
    neg, pos = int(classes[0]), int(classes[1])
    y = np.where(lab == pos, 1.0, -1.0)

    if gram is None:
        gram = _rbf_gram(X, gamma)
    elif gram.shape[0] < len(X) or gram.shape[1] < len(X):
        raise TrainingError("precomputed gram matrix smaller than the training set")
    ah, bias, n_iter, violation = _smo(
        gram, X, len(X), y, float(c), float(tol), int(max_iter),
        len(X) >= SECOND_ORDER_MIN_N,
    )

    sv = np.flatnonzero(ah != 0.0)
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coefficients=ah[sv].copy(),
        bias=float(bias),
        kernel=RbfKernel(gamma=gamma),
        c=float(c),
        labels=(neg, pos),
        kkt_violation=float(violation),
        n_iter=int(n_iter),
    )


def fit_labeled(
    samples: Sequence[LabeledSample],
    c: float = DEFAULT_C,
    gamma: float = DEFAULT_GAMMA,
    **kwargs,
) -> SvmModel:
    """Convenience wrapper taking the campaign's labeled-sample records."""
    X = np.array([s.state for s in samples], dtype=float)
    y = np.array([s.label for s in samples])
    return svm_fit(X, y, c=c, gamma=gamma, **kwargs)


def decision_value(model: SvmModel, u: np.ndarray) -> float | np.ndarray:
    """Signed distance proxy: sum_i coef_i k(sv_i, u) + bias.

    The sign picks the class; |value| is the margin used for candidate
    ranking. Accepts one state (d,) or a batch (n, d).
    """
    pts = np.asarray(u, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    K = rbf_cross(pts, model.support_vectors, model.kernel.gamma)
    vals = K @ model.dual_coefficients + model.bias
    return float(vals[0]) if single else vals


def predict(model: SvmModel, u: np.ndarray) -> int | np.ndarray:
    """Attractor id at u; the boundary itself (decision exactly 0) maps to the
    positive class."""
    vals = decision_value(model, u)
    if np.isscalar(vals):
        return model.labels[1] if vals >= 0 else model.labels[0]
    return np.where(np.asarray(vals) >= 0, model.labels[1], model.labels[0])
