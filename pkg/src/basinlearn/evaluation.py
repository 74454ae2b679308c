"""Ground-truth grids, F1 scoring, baselines and the label-efficiency benchmark.

The benchmark compares four sampling strategies at matched oracle cost: plain
uniform grids, uniform grids with trajectory harvesting, active learning with
harvesting, and the full hybrid loop. Cost is the number of oracle queries
(each simulated or physical experiment is equally expensive); harvested
samples are free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import svm as svm_mod
from .campaign import HalConfig, run_campaign
from .domain import StateDomain, denormalize, make_grid_pool
from .dynamics import MagnetSystemParams, OracleInterface, SimConfig, label_states
from .errors import GenerationError, TrainingError
from .trajectory_sampling import LabeledSample, subsample

F1_THRESHOLDS = (0.4, 0.6, 0.8, 0.9)
DEFAULT_QUERY_CAP = 150
DEFAULT_UNIFORM_K_MAX = 40

BENCHMARK_METHODS = ("uniform", "uniform+ast", "ast+al", "hal")


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


@dataclass
class GroundTruthGrid:
    """Reference attractor labels on an inclusive unit grid (row-major)."""

    resolution: int
    labels: np.ndarray  # (resolution**dim,)
    domain: StateDomain

    @property
    def unit_states(self) -> np.ndarray:
        return make_grid_pool(self.domain, self.resolution).candidates

    def as_square(self) -> np.ndarray:
        return self.labels.reshape((self.resolution,) * self.domain.dim)


def ground_truth(
    domain: StateDomain,
    resolution: int,
    params: MagnetSystemParams,
    cfg: SimConfig,
) -> GroundTruthGrid:
    """Label every grid node by simulation; any non-convergent node is an error."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    units = make_grid_pool(domain, resolution).candidates
    labels = label_states(denormalize(units, domain), params, cfg, domain)
    bad = np.flatnonzero(labels < 0)
    if len(bad):
        node = denormalize(units[bad[0]], domain)
        raise GenerationError(
            f"{len(bad)} non-convergent nodes; first at index {bad[0]} state {node.tolist()}"
        )
    return GroundTruthGrid(resolution=resolution, labels=labels, domain=domain)


def basin_components(grid: GroundTruthGrid) -> dict[int, int]:
    """4-connected component count per basin label on the square grid."""
    sq = grid.as_square()
    if sq.ndim != 2:
        raise ValueError("component check expects a 2-D grid")
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    out = {}
    for lab in np.unique(sq):
        _, count = ndimage.label(sq == lab, structure=structure)
        out[int(lab)] = int(count)
    return out


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


@dataclass
class F1Report:
    per_class: dict[int, dict[str, float]]
    macro_f1: float
    confusion: dict[str, int] = field(default_factory=dict)


def f1_score(predicted: np.ndarray, truth: np.ndarray) -> F1Report:
    """Per-class precision/recall/F1 and their unweighted (macro) mean.

    Degenerate ratios (0/0) score 0, so a class that is never predicted and
    never present contributes a zero F1.
    """
    pred = np.asarray(predicted)
    true = np.asarray(truth)
    if pred.shape != true.shape:
        raise ValueError("predicted and truth labels must have equal length")
    classes = sorted(set(np.unique(true)) | set(np.unique(pred)))
    per_class = {}
    confusion = {}
    f1s = []
    for cls in classes:
        tp = int(np.sum((pred == cls) & (true == cls)))
        fp = int(np.sum((pred == cls) & (true != cls)))
        fn = int(np.sum((pred != cls) & (true == cls)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[int(cls)] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "tp": tp,
            "fp": fp,
            "fn": fn,
        }
        confusion[f"tp_{cls}"] = tp
        confusion[f"fp_{cls}"] = fp
        confusion[f"fn_{cls}"] = fn
        f1s.append(f1)
    return F1Report(per_class=per_class, macro_f1=float(np.mean(f1s)), confusion=confusion)


def macro_f1(predicted: np.ndarray, truth: np.ndarray) -> float:
    return f1_score(predicted, truth).macro_f1


# ---------------------------------------------------------------------------
# Uniform baselines
# ---------------------------------------------------------------------------


def uniform_baseline(
    domain: StateDomain,
    k_per_dim: int,
    oracle: OracleInterface,
    with_ast: bool,
    eval_states: np.ndarray,
    eval_labels: np.ndarray,
    spacing: float = 0.07,
    svm_c: float = svm_mod.DEFAULT_C,
    svm_gamma: float = svm_mod.DEFAULT_GAMMA,
) -> tuple[list[LabeledSample], F1Report]:
    """Query every node of a k x k grid, optionally harvest trajectories,
    train the classifier and score it against reference labels.

    A grid whose nodes all fall in one basin cannot train a discriminator;
    the baseline then scores a constant classifier predicting that class.
    """
    if k_per_dim < 2:
        raise ValueError("k_per_dim must be >= 2")
    nodes = make_grid_pool(domain, k_per_dim).candidates
    samples: list[LabeledSample] = []
    for qi, u in enumerate(nodes):
        traj = oracle.label_query(denormalize(u, domain))
        if with_ast:
            samples.extend(subsample(traj, spacing, domain, source_query=qi))
        else:
            samples.append(
                LabeledSample(
                    state=u.copy(), label=traj.label, provenance="queried",
                    source_query=qi, remaining_length=1,
                )
            )
    X = np.array([s.state for s in samples])
    y = np.array([s.label for s in samples])
    if len(np.unique(y)) >= 2:
        model = svm_mod.svm_fit(X, y, c=svm_c, gamma=svm_gamma)
        pred = svm_mod.predict(model, eval_states)
    else:
        pred = np.full(len(eval_states), int(y[0]))
    return samples, f1_score(pred, eval_labels)


# ---------------------------------------------------------------------------
# Label-efficiency curves
# ---------------------------------------------------------------------------


def f1_series_to_steps(metrics: list[dict], cap: int) -> np.ndarray:
    """Fill-forward a campaign's (queries, f1) rows onto query counts 1..cap."""
    out = np.zeros(cap)
    for row in metrics:
        if row["macro_f1"] is None:
            continue
        q = row["queries"]
        if q <= cap:
            out[q - 1 :] = row["macro_f1"]
    return out


def al_method_runs(
    mode: str,
    seeds: list[int],
    cap: int,
    domain: StateDomain,
    oracle_factory,
    eval_states: np.ndarray,
    eval_labels: np.ndarray,
    hal_kwargs: dict | None = None,
) -> np.ndarray:
    """Per-seed macro-F1 at each query count: shape (len(seeds), cap)."""
    kwargs = dict(hal_kwargs or {})
    curves = []
    for seed in seeds:
        cfg = HalConfig(mode=mode, seed=seed, episodes=cap, query_budget=cap, **kwargs)
        _, metrics = run_campaign(
            cfg, oracle_factory(), domain,
            eval_grid=(eval_states, eval_labels), f1_fn=macro_f1,
        )
        curves.append(f1_series_to_steps(metrics, cap))
    return np.stack(curves)


def al_method_curve(
    mode: str,
    seeds: list[int],
    cap: int,
    domain: StateDomain,
    oracle_factory,
    eval_states: np.ndarray,
    eval_labels: np.ndarray,
    hal_kwargs: dict | None = None,
) -> np.ndarray:
    """Median macro-F1 at each query count 1..cap across seeded campaigns."""
    runs = al_method_runs(
        mode, seeds, cap, domain, oracle_factory, eval_states, eval_labels, hal_kwargs
    )
    return np.median(runs, axis=0)


def first_crossing(values: np.ndarray, labels_at: np.ndarray, threshold: float):
    """Smallest label count whose value reaches the threshold, else None."""
    hit = np.flatnonzero(values >= threshold)
    return int(labels_at[hit[0]]) if len(hit) else None


def uniform_method_curve(
    with_ast: bool,
    k_values: list[int],
    domain: StateDomain,
    oracle_factory,
    eval_states: np.ndarray,
    eval_labels: np.ndarray,
    spacing: float = 0.07,
    svm_c: float = svm_mod.DEFAULT_C,
    svm_gamma: float = svm_mod.DEFAULT_GAMMA,
    stop_at: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(label counts k^2, macro-F1) for a sweep of uniform grid resolutions.

    ``stop_at`` ends the sweep once that F1 level is reached (coarser grids
    have already answered every threshold question below it).
    """
    labels_at = []
    f1s = []
    for k in k_values:
        _, report = uniform_baseline(
            domain, k, oracle_factory(), with_ast, eval_states, eval_labels,
            spacing=spacing, svm_c=svm_c, svm_gamma=svm_gamma,
        )
        labels_at.append(k * k)
        f1s.append(report.macro_f1)
        if stop_at is not None and report.macro_f1 >= stop_at:
            break
    return np.array(labels_at), np.array(f1s)


def labels_to_f1_table(
    methods: list[str],
    seeds: list[int],
    domain: StateDomain,
    oracle_factory,
    eval_states: np.ndarray,
    eval_labels: np.ndarray,
    cap: int = DEFAULT_QUERY_CAP,
    uniform_k_max: int = DEFAULT_UNIFORM_K_MAX,
    thresholds: tuple[float, ...] = F1_THRESHOLDS,
    hal_kwargs: dict | None = None,
) -> dict[str, dict[float, int | None]]:
    """Minimum label count reaching each F1 threshold, per method.

    AL-style methods run seeded campaigns to the query cap and use the median
    F1 across seeds; uniform methods sweep grid resolutions (deterministic).
    None marks "> cap" (the budget ran out below the threshold).
    """
    table: dict[str, dict[float, int | None]] = {}
    for method in methods:
        if method not in BENCHMARK_METHODS:
            raise ValueError(f"unknown method {method!r}")
        if method in ("uniform", "uniform+ast"):
            ks = list(range(2, uniform_k_max + 1))
            labels_at, f1s = uniform_method_curve(
                method == "uniform+ast", ks, domain, oracle_factory,
                eval_states, eval_labels,
                stop_at=max(thresholds),
                **{k: v for k, v in (hal_kwargs or {}).items()
                   if k in ("spacing", "svm_c", "svm_gamma")},
            )
        else:
            mode = "al" if method == "ast+al" else "alternate"
            f1s = al_method_curve(
                mode, seeds, cap, domain, oracle_factory,
                eval_states, eval_labels, hal_kwargs,
            )
            labels_at = np.arange(1, cap + 1)
        table[method] = {
            thr: first_crossing(f1s, labels_at, thr) for thr in thresholds
        }
    return table


# ---------------------------------------------------------------------------
# Final classifier export
# ---------------------------------------------------------------------------


@dataclass
class KnnClassifier:
    """Majority vote among the k nearest labeled samples (unit coordinates)."""

    states: np.ndarray
    labels: np.ndarray
    k: int

    def predict(self, u: np.ndarray) -> int | np.ndarray:
        pts = np.asarray(u, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.empty(len(pts), dtype=np.int64)
        step = max(1, int(4e6) // max(1, len(self.states)))
        for i in range(0, len(pts), step):
            blk = pts[i : i + step]
            d2 = ((blk[:, None, :] - self.states[None, :, :]) ** 2).sum(axis=2)
            order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            votes = self.labels[order]
            for r, row in enumerate(votes):
                vals, counts = np.unique(row, return_counts=True)
                out[i + r] = int(vals[np.argmax(counts)])
        return int(out[0]) if single else out

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "knn",
                "k": self.k,
                "states": [[float(v) for v in s] for s in self.states],
                "labels": [int(v) for v in self.labels],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "KnnClassifier":
        d = json.loads(text)
        if d.get("kind") != "knn":
            raise ValueError("not a knn export")
        return cls(
            states=np.array(d["states"], dtype=float),
            labels=np.array(d["labels"], dtype=np.int64),
            k=int(d["k"]),
        )


def knn_export(samples: list[LabeledSample], k: int) -> KnnClassifier:
    """Freeze the campaign's labeled set into a serializable final classifier."""
    if k < 1 or k % 2 == 0:
        raise TrainingError("k must be odd and >= 1")
    if len(samples) < k:
        raise TrainingError("need at least k labeled samples")
    return KnnClassifier(
        states=np.array([s.state for s in samples], dtype=float),
        labels=np.array([s.label for s in samples], dtype=np.int64),
        k=k,
    )
