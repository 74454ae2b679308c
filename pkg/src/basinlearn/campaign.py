"""The hybrid active-learning campaign loop.

Bootstrap with random queries until both attractors have been seen, then per
episode: refit the boundary classifier and the trajectory-length regressor,
pick the next initial condition either by smallest margin (exploitation,
tie-broken toward long predicted trajectories) or by largest distance to the
labeled set (exploration), query the oracle, and harvest spaced samples from
the returned trajectory.

Every consumed query appends one structured event; the event log plus the
campaign configuration reconstruct the full campaign state, including the RNG
stream, so a campaign can be resumed byte-for-byte after a crash.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np

from . import gp as gp_mod
from . import svm as svm_mod
from .domain import (
    SamplePool,
    StateDomain,
    denormalize,
    make_grid_pool,
    min_distances,
    normalize,
)
from .dynamics import OracleInterface, Trajectory
from .errors import (
    CorruptLogError,
    NonConvergenceError,
    PoolExhaustedError,
    SingleBasinError,
    TrainingError,
)
from .trajectory_sampling import DEFAULT_SPACING, LabeledSample, subsample

EVENT_BOOTSTRAP = "bootstrap_query"
EVENT_EPISODE = "episode"
EVENT_FAILURE = "failure"

MODES = ("alternate", "random", "al", "dbs")

# The GP hyper grid is re-searched when the training set has grown by this
# factor since the last search; in between, fits reuse the cached hypers.
GP_REFRESH_GROWTH = 1.25


@dataclass(frozen=True)
class HalConfig:
    """Campaign hyper-parameters; defaults reproduce the reference setup."""

    p: float = 0.05
    spacing: float = DEFAULT_SPACING
    episodes: int = 34
    mode: str = "alternate"
    seed: int = 0
    svm_c: float = svm_mod.DEFAULT_C
    svm_gamma: float = svm_mod.DEFAULT_GAMMA
    n_per_dim: int = 50
    query_budget: int | None = None
    gp_cap: int = gp_mod.TRAINING_CAP
    bootstrap_cap: int | None = None

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("p must be in (0, 1]")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_per_dim < 2:
            raise ValueError("n_per_dim must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "HalConfig":
        return cls(**d)


class _GramCache:
    """Append-only RBF Gram matrix over the labeled states.

    Purely a computation cache: entries are produced by the same elementwise
    kernel as a fresh build, so fits see identical numbers either way.
    """

    def __init__(self, gamma: float):
        self.gamma = gamma
        self._buf = np.empty((0, 0))
        self.n = 0

    def extend(self, old_states: np.ndarray, new_states: np.ndarray) -> None:
        n_old = self.n
        n_new = n_old + len(new_states)
        if n_new > self._buf.shape[0]:
            cap = max(256, 2 * self._buf.shape[0])
            while cap < n_new:
                cap *= 2
            grown = np.empty((cap, cap))
            grown[:n_old, :n_old] = self._buf[:n_old, :n_old]
            self._buf = grown
        if n_old:
            block = svm_mod.rbf_cross(new_states, old_states[:n_old], self.gamma)
            self._buf[n_old:n_new, :n_old] = block
            self._buf[:n_old, n_old:n_new] = block.T
        self._buf[n_old:n_new, n_old:n_new] = svm_mod.rbf_cross(
            new_states, new_states, self.gamma
        )
        self.n = n_new

    @property
    def matrix(self) -> np.ndarray:
        # Full capacity buffer; consumers index the leading n rows/columns.
        return self._buf


@dataclass
class CampaignState:
    """Everything the loop owns. Single-writer: only the campaign mutates it."""

    domain: StateDomain
    config: HalConfig
    pool: SamplePool
    labeled: list[LabeledSample] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)
    svm_model: svm_mod.SvmModel | None = None
    gp_model: gp_mod.GpModel | None = None
    episode: int = 0
    queries: int = 0
    rng: np.random.Generator = None  # type: ignore[assignment]
    events: list[dict] = field(default_factory=list)
    sim_time: float = 0.0
    bootstrap_done: bool = False

    # incremental caches
    _X: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _y: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _rem: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _n: int = 0
    _gram: _GramCache = field(default=None, repr=False)  # type: ignore[assignment]
    _dmin: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _gp_hypers: gp_mod.GpHypers | None = None
    _gp_hyper_n: int = 0

    @property
    def labeled_states(self) -> np.ndarray:
        return self._X[: self._n]

    @property
    def labeled_labels(self) -> np.ndarray:
        return self._y[: self._n]

    @property
    def remaining_lengths(self) -> np.ndarray:
        return self._rem[: self._n]

    def seen_labels(self) -> set[int]:
        return set(int(v) for v in np.unique(self.labeled_labels))


def new_campaign(config: HalConfig, domain: StateDomain) -> CampaignState:
    pool = make_grid_pool(domain, config.n_per_dim)
    dim = domain.dim
    return CampaignState(
        domain=domain,
        config=config,
        pool=pool,
        rng=np.random.default_rng(config.seed),
        _X=np.empty((0, dim)),
        _y=np.empty(0, dtype=np.int64),
        _rem=np.empty(0),
        _gram=_GramCache(config.svm_gamma),
        _dmin=np.full(len(pool), np.inf),
    )


def _append_samples(state: CampaignState, samples: Sequence[LabeledSample]) -> None:
    if not samples:
        return
    new_X = np.array([s.state for s in samples], dtype=float)
    new_y = np.array([s.label for s in samples], dtype=np.int64)
    new_rem = np.array([s.remaining_length for s in samples], dtype=float)
    n_old = state._n
    n_new = n_old + len(samples)
    if n_new > len(state._X):
        cap = max(256, 2 * len(state._X))
        while cap < n_new:
            cap *= 2
        grown_X = np.empty((cap, state.domain.dim))
        grown_X[:n_old] = state._X[:n_old]
        grown_y = np.empty(cap, dtype=np.int64)
        grown_y[:n_old] = state._y[:n_old]
        grown_rem = np.empty(cap)
        grown_rem[:n_old] = state._rem[:n_old]
        state._X, state._y, state._rem = grown_X, grown_y, grown_rem
    state._gram.extend(state._X, new_X)
    state._X[n_old:n_new] = new_X
    state._y[n_old:n_new] = new_y
    state._rem[n_old:n_new] = new_rem
    state._n = n_new
    state.labeled.extend(samples)
    np.minimum(
        state._dmin,
        min_distances(state.pool.candidates, new_X),
        out=state._dmin,
    )


def _gp_refresh_hypers(state: CampaignState) -> None:
    """Re-run the hyper grid search when the training set grew enough."""
    n = state._n
    if n < 3:
        return
    if state._gp_hypers is not None and n < math.ceil(GP_REFRESH_GROWTH * state._gp_hyper_n):
        return
    model = gp_mod.gp_fit(
        state.labeled_states,
        state.remaining_lengths,
        rng=np.random.default_rng([state.config.seed, n]),
        cap=state.config.gp_cap,
    )
    state._gp_hypers = model.hypers
    state._gp_hyper_n = n
    state.gp_model = model


def refit_models(state: CampaignState) -> None:
    """Retrain classifier and regressor from scratch on the current samples."""
    _gp_refresh_hypers(state)
    if state._gp_hypers is not None and state._gp_hyper_n != state._n:
        state.gp_model = gp_mod.gp_fit(
            state.labeled_states,
            state.remaining_lengths,
            hypers=state._gp_hypers,
            rng=np.random.default_rng([state.config.seed, state._n]),
            cap=state.config.gp_cap,
        )
    if len(state.seen_labels()) >= 2:
        state.svm_model = svm_mod.svm_fit(
            state.labeled_states,
            state.labeled_labels,
            c=state.config.svm_c,
            gamma=state.config.svm_gamma,
            gram=state._gram.matrix,
        )
    else:
        state.svm_model = None


def _make_event(
    state: CampaignState,
    etype: str,
    method: str,
    pool_index: int,
    phys_state: np.ndarray,
    label: int | None,
    samples: Sequence[LabeledSample],
    ts: float,
) -> dict:
    return {
        "type": etype,
        "episode": int(state.episode),
        "method": method,
        "pool_index": int(pool_index),
        "state": [float(v) for v in phys_state],
        "label": None if label is None else int(label),
        "ast_count": len(samples),
        "samples": [
            [float(v) for v in denormalize(s.state, state.domain)] + [int(s.remaining_length)]
            for s in samples
        ],
        "ts": float(ts),
        "seq": len(state.events),
    }


def apply_query_result(
    state: CampaignState,
    pool_index: int,
    method: str,
    trajectory: Trajectory | None,
    samples: Sequence[LabeledSample],
    ts: float | None = None,
) -> dict:
    """Record one consumed oracle query (successful or failed) into the state.

    With a trajectory/samples: the candidate is marked labeled, samples join
    the labeled set, and an episode or bootstrap event is appended. Without:
    the candidate is consumed and a failure event is appended.
    """
    state.queries += 1
    if trajectory is not None:
        state.trajectories.append(trajectory)
        state.sim_time += trajectory.duration
        state.pool.mark_labeled(pool_index, trajectory.label)
        _append_samples(state, samples)
        etype = EVENT_BOOTSTRAP if method == "bootstrap" else EVENT_EPISODE
        ev = _make_event(
            state, etype, method, pool_index,
            trajectory.initial, trajectory.label, samples,
            state.sim_time if ts is None else ts,
        )
    else:
        state.pool.mark_consumed(pool_index)
        phys = denormalize(state.pool.candidates[pool_index], state.domain)
        ev = _make_event(
            state, EVENT_FAILURE, method, pool_index, phys, None, [],
            state.sim_time if ts is None else ts,
        )
    state.events.append(ev)
    return ev


def _query_candidate(
    state: CampaignState, oracle: OracleInterface, pool_index: int, method: str
) -> dict:
    phys = denormalize(state.pool.candidates[pool_index], state.domain)
    try:
        traj = oracle.label_query(phys)
    except NonConvergenceError as exc:
        state.sim_time += getattr(exc, "elapsed", 0.0) or 0.0
        return apply_query_result(state, pool_index, method, None, [])
    samples = subsample(traj, state.config.spacing, state.domain, source_query=state.queries)
    return apply_query_result(state, pool_index, method, traj, samples)


def draw_bootstrap_index(state: CampaignState) -> int:
    """Seeded uniform draw over the currently unlabeled candidates."""
    unl = state.pool.unlabeled_indices()
    if len(unl) == 0:
        raise PoolExhaustedError("no unlabeled candidates left for bootstrap")
    return int(unl[state.rng.integers(len(unl))])


def bootstrap(state: CampaignState, oracle: OracleInterface) -> None:
    """Random queries until two distinct labels exist (then fit the models).

    Raises :class:`SingleBasinError` when the candidate budget (default: the
    whole pool) is exhausted with a single label observed.
    """
    cap = state.config.bootstrap_cap or len(state.pool)
    attempts = 0
    while len(state.seen_labels()) < 2:
        if attempts >= cap or len(state.pool.unlabeled_indices()) == 0:
            raise SingleBasinError(
                f"bootstrap saw labels {sorted(state.seen_labels())} after {attempts} queries"
            )
        idx = draw_bootstrap_index(state)
        attempts += 1
        _query_candidate(state, oracle, idx, "bootstrap")
        refit_models(state)
    state.bootstrap_done = True


def select_al(state: CampaignState, p: float) -> int:
    """Smallest-margin candidate, tie-broken by longest predicted trajectory.

    Ranks every unlabeled candidate by |decision value|, keeps the ceil(p*U)
    smallest, and returns the one whose predicted trajectory length is
    largest; exact prediction ties go to the lowest pool index.
    """
    if state.svm_model is None:
        raise TrainingError("AL selection requires a fitted classifier")
    unl = state.pool.unlabeled_indices()
    if len(unl) == 0:
        raise PoolExhaustedError("no unlabeled candidates left")
    margins = np.abs(svm_mod.decision_value(state.svm_model, state.pool.candidates[unl]))
    m = math.ceil(p * len(unl))
    shortlist = unl[np.argsort(margins, kind="stable")[:m]]
    if state.gp_model is not None:
        lengths = np.asarray(gp_mod.predict_mean(state.gp_model, state.pool.candidates[shortlist]))
    else:
        lengths = np.zeros(len(shortlist))
    best = lengths.max()
    return int(shortlist[lengths == best].min())


def select_dbs(state: CampaignState) -> int:
    """Unlabeled candidate farthest from every labeled sample (queried + harvested)."""
    if state._n == 0:
        raise TrainingError("DBS selection requires at least one labeled sample")
    unl = state.pool.unlabeled_indices()
    if len(unl) == 0:
        raise PoolExhaustedError("no unlabeled candidates left")
    return int(unl[np.argmax(state._dmin[unl])])


def schedule_method(config: HalConfig, episode: int, rng: np.random.Generator) -> str:
    """AL/DBS decision for this episode. Odd episodes are AL when alternating;
    random mode consumes one fair coin flip from the campaign stream."""
    if config.mode == "alternate":
        return "AL" if episode % 2 == 1 else "DBS"
    if config.mode == "random":
        return "AL" if int(rng.integers(2)) == 0 else "DBS"
    return "AL" if config.mode == "al" else "DBS"


def propose_episode(state: CampaignState) -> tuple[int, str]:
    """Advance to the next episode and pick its candidate.

    Mutates only the episode counter and (in random mode) the RNG stream;
    callers must follow up with exactly one applied query for the proposal.
    """
    if not state.bootstrap_done:
        raise TrainingError("bootstrap must complete before episodes run")
    state.episode += 1
    method = schedule_method(state.config, state.episode, state.rng)
    idx = select_al(state, state.config.p) if method == "AL" else select_dbs(state)
    return idx, method


def run_episode(state: CampaignState, oracle: OracleInterface) -> dict:
    """One selection + query + harvest + refit cycle; returns the logged event."""
    idx, method = propose_episode(state)
    ev = _query_candidate(state, oracle, idx, method)
    if ev["type"] != EVENT_FAILURE:
        refit_models(state)
    return ev


def run_campaign(
    config: HalConfig,
    oracle: OracleInterface,
    domain: StateDomain,
    eval_grid: tuple[np.ndarray, np.ndarray] | None = None,
    f1_fn: Callable[[np.ndarray, np.ndarray], float] | None = None,
) -> tuple[CampaignState, list[dict]]:
    """Bootstrap then up to ``episodes`` episodes (stopping at query_budget).

    ``eval_grid`` = (unit states, true labels): when given, a metrics row with
    macro-F1 is recorded after bootstrap and after every episode.
    """
    state = new_campaign(config, domain)
    bootstrap(state, oracle)
    metrics: list[dict] = []

    def record():
        row = {"queries": state.queries, "labeled": len(state.labeled), "macro_f1": None}
        if eval_grid is not None and state.svm_model is not None:
            pred = svm_mod.predict(state.svm_model, eval_grid[0])
            row["macro_f1"] = float(f1_fn(pred, eval_grid[1]))
        metrics.append(row)

    record()
    for _ in range(config.episodes):
        if config.query_budget is not None and state.queries >= config.query_budget:
            break
        run_episode(state, oracle)
        record()
    return state, metrics


def estimate_raster(state: CampaignState, resolution: int) -> dict:
    """Row-major decision/label raster over the domain, with the sample overlay.

    The shared wire shape for the service estimate route and the CLI export.
    """
    if state.svm_model is None:
        raise TrainingError("no classifier fitted yet")
    units = make_grid_pool(state.domain, resolution).candidates
    decision = svm_mod.decision_value(state.svm_model, units)
    labels = svm_mod.predict(state.svm_model, units)
    axes = [
        np.linspace(state.domain.lower[i], state.domain.upper[i], resolution)
        for i in range(state.domain.dim)
    ]
    return {
        "resolution": resolution,
        "xs": [float(v) for v in axes[0]],
        "vs": [float(v) for v in axes[1]],
        "decision": [float(v) for v in decision],
        "labels": [int(v) for v in labels],
        "samples": [
            {
                "state": [float(v) for v in denormalize(s.state, state.domain)],
                "label": int(s.label),
                "provenance": s.provenance,
            }
            for s in state.labeled
        ],
    }


# ---------------------------------------------------------------------------
# Event log serialization and replay
# ---------------------------------------------------------------------------


def dump_event(event: dict) -> str:
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


def dump_event_log(events: Sequence[dict]) -> str:
    return "".join(dump_event(e) + "\n" for e in events)


def parse_event_log(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _samples_from_event(state: CampaignState, event: dict) -> list[LabeledSample]:
    out = []
    n = event["ast_count"]
    for rank, (x, v, rem) in enumerate(event["samples"]):
        out.append(
            LabeledSample(
                state=normalize(np.array([x, v]), state.domain),
                label=int(event["label"]),
                provenance="queried" if rank == 0 else "trajectory",
                source_query=event["seq"],
                remaining_length=int(rem),
            )
        )
    if len(out) != n:
        raise CorruptLogError(f"event {event['seq']}: ast_count != len(samples)")
    return out


def replay_events(
    config: HalConfig, domain: StateDomain, events: Sequence[dict]
) -> CampaignState:
    """Rebuild campaign state from its event log.

    Consumes the RNG stream exactly as the live run did (one draw per
    bootstrap query, one coin per random-mode episode) and cross-checks each
    draw against the log, so the rebuilt state continues identically to an
    uninterrupted campaign. Trajectory objects are not reconstructed; the
    labeled set, pool status, models and RNG stream are.
    """
    state = new_campaign(config, domain)
    for ev in events:
        etype = ev["type"]
        method = ev["method"]
        if method == "bootstrap":
            idx = draw_bootstrap_index(state)
            if idx != ev["pool_index"]:
                raise CorruptLogError(
                    f"event {ev['seq']}: bootstrap draw {idx} != logged {ev['pool_index']}"
                )
        else:
            state.episode += 1
            if ev["episode"] != state.episode:
                raise CorruptLogError(
                    f"event {ev['seq']}: episode {ev['episode']} out of order"
                )
            expected = schedule_method(config, state.episode, state.rng)
            if expected != method:
                raise CorruptLogError(
                    f"event {ev['seq']}: method {method} != scheduled {expected}"
                )
        idx = ev["pool_index"]
        if etype == EVENT_FAILURE:
            state.queries += 1
            state.pool.mark_consumed(idx)
            state.events.append(dict(ev))
        else:
            samples = _samples_from_event(state, ev)
            state.queries += 1
            state.pool.mark_labeled(idx, int(ev["label"]))
            _append_samples(state, samples)
            state.sim_time = float(ev["ts"])
            state.events.append(dict(ev))
            # mirror the live hyper-search schedule without refitting posteriors
            _gp_refresh_hypers(state)
    state.bootstrap_done = len(state.seen_labels()) >= 2
    if state.bootstrap_done:
        refit_models(state)
    return state
