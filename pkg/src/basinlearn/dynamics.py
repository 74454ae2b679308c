"""Bistable magnet-spring oscillator: forces, equilibria, simulation, oracles.

The labeling agent for simulated campaigns. A second-order system

    m x'' + c x' + k x = F(x)

with a magnet force F that creates two stable equilibria. Integration is
fixed-step explicit RK4 with a dwell-window capture rule; the same scalar
step kernel drives both single-trajectory and batched labeling, so results
are bit-identical between the two paths.
"""

from __future__ import annotations

import abc
import threading
from dataclasses import dataclass

import numpy as np
from numba import njit

from .domain import StateDomain
from .errors import NonConvergenceError

__all__ = [
    "MagnetSystemParams",
    "SimConfig",
    "Attractor",
    "Trajectory",
    "OracleInterface",
    "SimulatedOracle",
    "magnet_force",
    "accel",
    "magnet_potential",
    "find_equilibria",
    "find_attractors",
    "simulate",
    "label_states",
    "rollout",
]


@dataclass(frozen=True)
class MagnetSystemParams:
    """Physical parameters; defaults reproduce the reference bistable setup."""

    m: float = 1.0
    c: float = 0.5
    k: float = 10.0
    alpha: float = 100.0
    h: float = 1.5
    b: float = 1.3

    def __post_init__(self):
        for name in ("m", "c", "k", "h"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Integrator and capture settings.

    capture_tol is a distance in normalized unit coordinates; speed_tol is a
    physical velocity. Both must hold for dwell_steps consecutive steps near
    the same attractor before a trajectory is labeled.
    """

    step_size: float = 0.005
    max_time: float = 100.0
    capture_tol: float = 0.01
    speed_tol: float = 0.05
    dwell_steps: int = 50

    @property
    def max_steps(self) -> int:
        return int(round(self.max_time / self.step_size))


@dataclass(frozen=True)
class Attractor:
    id: int
    location: np.ndarray  # (position, velocity=0), physical units


@dataclass
class Trajectory:
    """Time-ordered states from one query, with its attractor label."""

    states: np.ndarray  # (n, 2) physical units
    times: np.ndarray  # (n,) seconds, strictly increasing from 0
    label: int
    initial: np.ndarray

    def __post_init__(self):
        if len(self.states) != len(self.times):
            raise ValueError("states/times length mismatch")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase strictly from 0")
        if not np.array_equal(self.states[0], self.initial):
            raise ValueError("trajectory must start at its initial condition")

    @property
    def duration(self) -> float:
        return float(self.times[-1])


def magnet_force(x, params: MagnetSystemParams):
    """Closed-form magnet force at position x (scalar or array)."""
    s = np.asarray(x, dtype=float) - params.b
    w = s * s + params.h * params.h
    out = params.alpha * s * (12.0 * params.h**2 - 3.0 * s * s) * w**-3.5
    return out if out.ndim else float(out)


def accel(x, v, params: MagnetSystemParams):
    """State-space acceleration (-c v - k x + F(x)) / m."""
    out = (-params.c * np.asarray(v, float) - params.k * np.asarray(x, float)
           + magnet_force(x, params)) / params.m
    return out if out.ndim else float(out)


def magnet_potential(x, params: MagnetSystemParams):
    """Potential energy of the magnet force (F = -dU/dx), used by energy checks."""
    s = np.asarray(x, dtype=float) - params.b
    w = s * s + params.h * params.h
    out = params.alpha * (2.0 * params.h**2 - s * s) * w**-2.5
    return out if out.ndim else float(out)


def find_equilibria(
    params: MagnetSystemParams,
    search_interval: tuple[float, float],
    scan_points: int = 4001,
) -> list[tuple[float, bool]]:
    """All equilibrium positions in the interval, with stability flags.

    Roots of k x = F(x) found by sign-change bracketing plus bisection driven
    to machine-level brackets; a root is stable when d/dx [k x - F(x)] > 0
    there (damping is positive). Returns [] when no sign change exists.
    """

    def residual(x):
        return params.k * x - magnet_force(x, params)

    lo, hi = float(search_interval[0]), float(search_interval[1])
    xs = np.linspace(lo, hi, scan_points)
    rs = residual(xs)
    roots: list[float] = []
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        ra, rb = rs[i], rs[i + 1]
        if ra == 0.0:
            roots.append(float(a))
            continue
        if rb == 0.0 or (ra < 0) == (rb < 0):
            continue
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break
            if (residual(mid) < 0) == (ra < 0):
                a = mid
            else:
                b = mid
        roots.append(0.5 * (a + b))
    if rs[-1] == 0.0:
        roots.append(float(xs[-1]))

    # collapse near-duplicates (0.5 grid cells) from zeros landing on scan points
    merge_tol = 0.5 * (hi - lo) / (scan_points - 1)
    merged: list[float] = []
    for r in sorted(roots):
        if merged and r - merged[-1] < merge_tol:
            continue
        merged.append(r)

    out = []
    eps = 1e-7 * max(1.0, hi - lo)
    for r in merged:
        slope = (residual(r + eps) - residual(r - eps)) / (2 * eps)
        out.append((r, bool(slope > 0)))
    return out


def find_attractors(
    params: MagnetSystemParams, domain: StateDomain
) -> list[Attractor]:
    """Stable equilibria inside the domain, ordered by position, ids 0..n-1."""
    lo, hi = float(domain.lower[0]), float(domain.upper[0])
    stable = sorted(x for x, ok in find_equilibria(params, (lo, hi)) if ok)
    return [Attractor(id=i, location=np.array([x, 0.0])) for i, x in enumerate(stable)]


# ---------------------------------------------------------------------------
# Integration core. One scalar RK4 step kernel shared by every execution path.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _accel_jit(x, v, m, c, k, alpha, h, b):
    s = x - b
    f = alpha * s * (12.0 * h * h - 3.0 * s * s) * (s * s + h * h) ** -3.5
    return (-c * v - k * x + f) / m


@njit(cache=True)
def _rk4_step(x, v, dt, m, c, k, alpha, h, b):
    k1x = v
    k1v = _accel_jit(x, v, m, c, k, alpha, h, b)
    k2x = v + 0.5 * dt * k1v
    k2v = _accel_jit(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, m, c, k, alpha, h, b)
    k3x = v + 0.5 * dt * k2v
    k3v = _accel_jit(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, m, c, k, alpha, h, b)
    k4x = v + dt * k3v
    k4v = _accel_jit(x + dt * k3x, v + dt * k3v, m, c, k, alpha, h, b)
    xn = x + dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
    vn = v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return xn, vn


@njit(cache=True)
def _integrate_capture(
    x0, v0, m, c, k, alpha, h, b,
    att_x, span_x, span_v,
    dt, max_steps, capture_tol, speed_tol, dwell_steps,
    record, xs_out, vs_out,
):
    """Integrate until dwell-captured by a stable attractor.

    Returns (label, steps_taken, final_x, final_v); label is -1 when max_steps
    elapse without capture. When record is True the caller supplies buffers of
    size max_steps + 1 that receive every state including the initial one.
    """
    x = x0
    v = v0
    if record:
        xs_out[0] = x
        vs_out[0] = v
    att = -1
    count = 0
    tol2 = capture_tol * capture_tol
    for i in range(max_steps):
        x, v = _rk4_step(x, v, dt, m, c, k, alpha, h, b)
        if record:
            xs_out[i + 1] = x
            vs_out[i + 1] = v
        best = -1
        dbest = 1e300
        for j in range(att_x.shape[0]):
            dx = (x - att_x[j]) / span_x
            dv = v / span_v
            d2 = dx * dx + dv * dv
            if d2 < dbest:
                dbest = d2
                best = j
        if dbest < tol2 and (v if v >= 0 else -v) < speed_tol:
            if best == att:
                count += 1
            else:
                att = best
                count = 1
            if count >= dwell_steps:
                return att, i + 1, x, v
        else:
            att = -1
            count = 0
    return -1, max_steps, x, v


@njit(cache=True)
def _label_batch_jit(
    xs, vs, m, c, k, alpha, h, b,
    att_x, span_x, span_v,
    dt, max_steps, capture_tol, speed_tol, dwell_steps,
):
    n = xs.shape[0]
    labels = np.empty(n, np.int64)
    dummy = np.empty(1)
    for i in range(n):
        lab, _, _, _ = _integrate_capture(
            xs[i], vs[i], m, c, k, alpha, h, b,
            att_x, span_x, span_v,
            dt, max_steps, capture_tol, speed_tol, dwell_steps,
            False, dummy, dummy,
        )
        labels[i] = lab
    return labels


def _capture_args(params: MagnetSystemParams, domain: StateDomain, attractors):
    att_x = np.array([a.location[0] for a in attractors], dtype=float)
    return (
        params.m, params.c, params.k, params.alpha, params.h, params.b,
        att_x,
        float(domain.span[0]), float(domain.span[1]),
    )


def simulate(
    initial: np.ndarray,
    params: MagnetSystemParams,
    cfg: SimConfig,
    domain: StateDomain,
    attractors: list[Attractor] | None = None,
) -> Trajectory:
    """Integrate one initial condition to capture and return its trajectory.

    Raises :class:`NonConvergenceError` (carrying the final state) when
    max_time elapses without a dwell capture.
    """
    if attractors is None:
        attractors = find_attractors(params, domain)
    if not attractors:
        raise NonConvergenceError("system has no stable attractor", np.asarray(initial, float))
    ic = np.asarray(initial, dtype=float)
    nmax = cfg.max_steps
    xs = np.empty(nmax + 1)
    vs = np.empty(nmax + 1)
    lab, steps, fx, fv = _integrate_capture(
        float(ic[0]), float(ic[1]), *_capture_args(params, domain, attractors),
        cfg.step_size, nmax, cfg.capture_tol, cfg.speed_tol, cfg.dwell_steps,
        True, xs, vs,
    )
    if lab < 0:
        raise NonConvergenceError(
            f"no capture within {cfg.max_time}s from {ic.tolist()}",
            np.array([fx, fv]),
            elapsed=steps * cfg.step_size,
        )
    states = np.stack([xs[: steps + 1], vs[: steps + 1]], axis=1)
    times = np.arange(steps + 1) * cfg.step_size
    return Trajectory(states=states, times=times, label=int(lab), initial=ic)


def label_states(
    states: np.ndarray,
    params: MagnetSystemParams,
    cfg: SimConfig,
    domain: StateDomain,
    attractors: list[Attractor] | None = None,
) -> np.ndarray:
    """Attractor labels for a batch of physical states; -1 marks non-convergence.

    Shares the scalar integration kernel with :func:`simulate`, so each entry
    equals the label simulate() would produce for that state.
    """
    if attractors is None:
        attractors = find_attractors(params, domain)
    s = np.ascontiguousarray(np.asarray(states, dtype=float))
    return _label_batch_jit(
        np.ascontiguousarray(s[:, 0]), np.ascontiguousarray(s[:, 1]),
        *_capture_args(params, domain, attractors),
        cfg.step_size, cfg.max_steps, cfg.capture_tol, cfg.speed_tol, cfg.dwell_steps,
    )


def rollout(
    initial: np.ndarray,
    params: MagnetSystemParams,
    dt: float,
    n_steps: int,
) -> np.ndarray:
    """Fixed number of RK4 steps with no capture logic; returns (n_steps+1, 2).

    Inspection helper (energy audits, step-refinement comparisons).
    """
    out = np.empty((n_steps + 1, 2))
    x, v = float(initial[0]), float(initial[1])
    out[0] = x, v
    for i in range(n_steps):
        x, v = _rk4_step(x, v, dt, params.m, params.c, params.k,
                         params.alpha, params.h, params.b)
        out[i + 1] = x, v
    return out


class OracleInterface(abc.ABC):
    """Labeling agent: maps an initial condition to a labeled trajectory.

    Every call to :meth:`label_query` increments :attr:`queries` by exactly
    one, including calls that end in :class:`NonConvergenceError`; the counter
    is the experiment-cost meter.
    """

    def __init__(self):
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def queries(self) -> int:
        return self._queries

    def label_query(self, initial: np.ndarray) -> Trajectory:
        with self._lock:
            self._queries += 1
        return self._run_query(np.asarray(initial, dtype=float))

    @abc.abstractmethod
    def _run_query(self, initial: np.ndarray) -> Trajectory:
        ...


class SimulatedOracle(OracleInterface):
    """Oracle backed by the RK4 simulator; deterministic per initial condition."""

    def __init__(
        self,
        params: MagnetSystemParams,
        cfg: SimConfig,
        domain: StateDomain,
        attractors: list[Attractor] | None = None,
    ):
        super().__init__()
        self.params = params
        self.cfg = cfg
        self.domain = domain
        self.attractors = attractors if attractors is not None else find_attractors(params, domain)

    def _run_query(self, initial: np.ndarray) -> Trajectory:
        return simulate(initial, self.params, self.cfg, self.domain, self.attractors)
