"""State space, normalization and the unlabeled candidate pool.

All sampling geometry (candidate spacing, nearest-labeled distances, kernel
length scales) lives in normalized unit coordinates; physical units appear
only at the oracle and API boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation, PoolExhaustedError

# SamplePool status codes (anything >= 0 is the attractor label).
UNLABELED = -1
CONSUMED = -2


@dataclass(frozen=True)
class StateDomain:
    """Axis-aligned box of valid states, in physical units."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("lower/upper must be 1-D vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower


def normalize(states: np.ndarray, domain: StateDomain) -> np.ndarray:
    """Map physical states into the closed unit cube.

    Accepts a single state ``(dim,)`` or a batch ``(n, dim)``. Out-of-domain
    coordinates raise :class:`DomainViolation` carrying the flat index of the
    first offender; clamping is never done silently.
    """
    s = np.asarray(states, dtype=float)
    below = s < domain.lower
    above = s > domain.upper
    bad = below | above
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        raise DomainViolation(
            f"state coordinate {idx} = {s.ravel()[idx]} outside domain", idx
        )
    return (s - domain.lower) / domain.span


def denormalize(unit_states: np.ndarray, domain: StateDomain) -> np.ndarray:
    """Inverse of :func:`normalize` (exact up to floating rounding)."""
    u = np.asarray(unit_states, dtype=float)
    return domain.lower + u * domain.span


def check_unit(unit_states: np.ndarray) -> np.ndarray:
    """Validate unit coordinates in [0, 1]; returns the array unchanged."""
    u = np.asarray(unit_states, dtype=float)
    bad = (u < 0.0) | (u > 1.0)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        raise DomainViolation(f"unit coordinate {idx} = {u.ravel()[idx]} outside [0, 1]", idx)
    return u


@dataclass
class SamplePool:
    """Fixed, ordered set of candidate unit states with per-candidate status.

    Candidate order never changes after creation: the index is the identity
    used by the selection tie rules and the event log. Only the campaign loop
    mutates ``status`` (single-writer contract).
    """

    candidates: np.ndarray
    status: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        c = np.ascontiguousarray(self.candidates, dtype=float)
        if c.ndim != 2:
            raise ValueError("candidates must be (n, dim)")
        check_unit(c)
        c.flags.writeable = False
        self.candidates = c
        if self.status is None:
            self.status = np.full(len(c), UNLABELED, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.candidates)

    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.status == UNLABELED)

    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.status >= 0)

    def mark_labeled(self, index: int, label: int) -> None:
        if self.status[index] != UNLABELED:
            raise PoolExhaustedError(f"candidate {index} was already selected")
        if label < 0:
            raise ValueError("labels are non-negative attractor ids")
        self.status[index] = label

    def mark_consumed(self, index: int) -> None:
        if self.status[index] != UNLABELED:
            raise PoolExhaustedError(f"candidate {index} was already selected")
        self.status[index] = CONSUMED


def make_grid_pool(domain: StateDomain, n_per_dim: int) -> SamplePool:
    """Inclusive uniform grid over the unit cube, row-major order.

    ``n_per_dim = 50`` over a 2-D domain yields the standard 2500-candidate
    pool, corners included.
    """
    if n_per_dim < 2:
        raise ValueError("n_per_dim must be >= 2")
    axes = [np.linspace(0.0, 1.0, n_per_dim)] * domain.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    cands = np.stack([m.ravel() for m in mesh], axis=-1)
    return SamplePool(candidates=cands)


def nearest_labeled_distance(u: np.ndarray, labeled: np.ndarray) -> float:
    """Euclidean distance in unit coordinates to the nearest labeled state.

    Exact linear scan; zero when ``u`` itself is labeled.
    """
    pts = np.asarray(labeled, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.size == 0:
        raise ValueError("labeled set must be non-empty")
    d = np.sqrt(((pts - np.asarray(u, dtype=float)) ** 2).sum(axis=1))
    return float(d.min())


def min_distances(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-point nearest distance from ``points`` (n,d) to ``targets`` (m,d).

    Same metric as :func:`nearest_labeled_distance`, vectorized; chunked so the
    intermediate (n, m) block stays modest.
    """
    pts = np.asarray(points, dtype=float)
    tgt = np.asarray(targets, dtype=float)
    if tgt.ndim == 1:
        tgt = tgt[None, :]
    if tgt.size == 0:
        raise ValueError("targets must be non-empty")
    out = np.empty(len(pts))
    step = max(1, int(4e6) // max(1, len(tgt)))
    for i in range(0, len(pts), step):
        blk = pts[i : i + step]
        d2 = ((blk[:, None, :] - tgt[None, :, :]) ** 2).sum(axis=2)
        out[i : i + step] = np.sqrt(d2.min(axis=1))
    return out
