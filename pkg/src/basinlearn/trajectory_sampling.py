"""Harvest extra labeled samples along a trajectory at fixed spatial spacing.

Every state on a trajectory converges to the same attractor, so one oracle
query yields many labels: walk the trajectory in time order and emit a state
whenever it has moved at least ``spacing`` (normalized Euclidean) away from
the previously emitted one. The count of emitted samples downstream of a
point ("remaining length") doubles as the regression target for the
trajectory-length model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .domain import StateDomain, normalize
from .dynamics import Trajectory

Provenance = Literal["queried", "trajectory"]

DEFAULT_SPACING = 0.07


@dataclass(frozen=True)
class LabeledSample:
    """One labeled unit state with its origin bookkeeping."""

    state: np.ndarray  # unit coordinates
    label: int
    provenance: Provenance
    source_query: int
    remaining_length: int

    def __post_init__(self):
        if self.remaining_length < 1:
            raise ValueError("remaining_length must be >= 1")


def subsample(
    trajectory: Trajectory,
    spacing: float,
    domain: StateDomain,
    source_query: int = 0,
) -> list[LabeledSample]:
    """Greedy first-crossing walk along the trajectory in unit coordinates.

    The initial condition is always emitted (provenance "queried"); thereafter
    the first state at least ``spacing`` away from the last emission is
    emitted. States outside the domain box are skipped: trajectories may
    overshoot the box even when they start inside it, and samples must stay
    valid unit states. Emission order assigns remaining lengths n, n-1, .., 1.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    states = trajectory.states
    if len(states) == 0:
        raise ValueError("trajectory is empty")

    inside = np.all((states >= domain.lower) & (states <= domain.upper), axis=1)
    if not inside[0]:
        raise ValueError("trajectory initial condition lies outside the domain")

    unit = (states - domain.lower) / domain.span
    emitted = [0]
    last = unit[0]
    for i in range(1, len(unit)):
        if not inside[i]:
            continue
        delta = unit[i] - last
        if np.sqrt((delta * delta).sum()) >= spacing:
            emitted.append(i)
            last = unit[i]

    n = len(emitted)
    samples = []
    for rank, idx in enumerate(emitted):
        samples.append(
            LabeledSample(
                state=normalize(states[idx], domain),
                label=trajectory.label,
                provenance="queried" if rank == 0 else "trajectory",
                source_query=source_query,
                remaining_length=n - rank,
            )
        )
    return samples


def subsample_states(
    states: np.ndarray,
    label: int,
    spacing: float,
    domain: StateDomain,
    source_query: int = 0,
) -> list[LabeledSample]:
    """Same greedy walk for a bare state sequence (human-submitted polylines)."""
    states = np.asarray(states, dtype=float)
    times = np.arange(len(states), dtype=float)
    traj = Trajectory(states=states, times=times, label=label, initial=states[0])
    return subsample(traj, spacing, domain, source_query)
