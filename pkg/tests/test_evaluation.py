import numpy as np
import pytest

import basinlearn as bl
from basinlearn.errors import GenerationError, TrainingError
from basinlearn.evaluation import (
    GroundTruthGrid,
    KnnClassifier,
    basin_components,
    f1_series_to_steps,
    first_crossing,
    ground_truth,
    macro_f1,
    uniform_baseline,
)

# First-run regression constant: the 2x2 corner grid sees a single basin and
# falls back to a constant classifier.
K2_MACRO_F1 = 0.4366831906264083
# Labels of the domain edge midpoints from the 10x-finer reference integration.
LABEL_LEFT_EDGE = 0
LABEL_RIGHT_EDGE = 0


def test_f1_perfect_and_inverted():
    truth = np.array([0, 0, 1, 1, 0, 1])
    perfect = bl.f1_score(truth, truth)
    assert perfect.macro_f1 == 1.0
    assert all(v["f1"] == 1.0 for v in perfect.per_class.values())
    inverted = bl.f1_score(1 - truth, truth)
    assert inverted.macro_f1 == 0.0
    assert all(v["f1"] == 0.0 for v in inverted.per_class.values())


def test_f1_direct_formula():
    # class 1: TP=8, FP=2, FN=2 -> P = R = F1 = 0.8
    truth = np.array([1] * 8 + [0] * 2 + [1] * 2 + [0] * 8)
    pred = np.array([1] * 8 + [1] * 2 + [0] * 2 + [0] * 8)
    rep = bl.f1_score(pred, truth)
    assert rep.per_class[1]["precision"] == pytest.approx(0.8)
    assert rep.per_class[1]["recall"] == pytest.approx(0.8)
    assert rep.per_class[1]["f1"] == pytest.approx(0.8)
    assert rep.confusion["tp_1"] == 8 and rep.confusion["fp_1"] == 2 and rep.confusion["fn_1"] == 2


def test_f1_macro_invariant_under_relabeling(rng):
    truth = rng.integers(0, 2, 60)
    pred = rng.integers(0, 2, 60)
    a = bl.f1_score(pred, truth).macro_f1
    b = bl.f1_score(1 - pred, 1 - truth).macro_f1
    assert a == pytest.approx(b, abs=1e-12)


def test_f1_zero_division_convention():
    rep = bl.f1_score(np.array([0, 0]), np.array([1, 1]))
    assert rep.per_class[0]["precision"] == 0.0  # predicted but never true
    assert rep.per_class[1]["recall"] == 0.0
    assert rep.macro_f1 == 0.0


def test_f1_length_mismatch():
    with pytest.raises(ValueError):
        bl.f1_score(np.array([0]), np.array([0, 1]))


def test_ground_truth_attractor_nodes(truth50, attractors, domain):
    units = truth50.unit_states
    for att in attractors:
        u = bl.normalize(att.location, domain)
        node = int(np.argmin(((units - u) ** 2).sum(axis=1)))
        assert truth50.labels[node] == att.id


def test_ground_truth_edge_midpoints(domain, params, sim_cfg, attractors):
    from basinlearn.dynamics import label_states
    labs = label_states(np.array([[-8.0, 0.0], [8.0, 0.0]]), params, sim_cfg, domain, attractors)
    assert labs[0] == LABEL_LEFT_EDGE
    assert labs[1] == LABEL_RIGHT_EDGE


def test_ground_truth_deterministic(domain, params, sim_cfg, truth50):
    again = ground_truth(domain, 50, params, sim_cfg)
    assert np.array_equal(again.labels, truth50.labels)


def test_ground_truth_reports_nonconvergent_node(domain, params):
    with pytest.raises(GenerationError):
        ground_truth(domain, 5, params, bl.SimConfig(max_time=0.05))


def test_basin_components_synthetic():
    dom = bl.StateDomain(lower=[0.0, 0.0], upper=[1.0, 1.0])
    labels = np.array([
        [0, 0, 1, 1],
        [0, 0, 1, 1],
        [1, 1, 0, 0],
        [1, 1, 0, 0],
    ])
    grid = GroundTruthGrid(resolution=4, labels=labels.ravel(), domain=dom)
    comps = basin_components(grid)
    assert comps == {0: 2, 1: 2}  # diagonal blocks only touch at a corner


def test_uniform_k2_single_class_fallback(domain, oracle, truth50):
    samples, rep = uniform_baseline(domain, 2, oracle, False, truth50.unit_states, truth50.labels)
    assert len(samples) == 4
    assert len({s.label for s in samples}) == 1
    assert rep.macro_f1 == pytest.approx(K2_MACRO_F1, abs=1e-12)


def test_uniform_f1_monotone_in_resolution(domain, params, sim_cfg, attractors, truth50):
    f1s = []
    for k in (5, 10, 15, 20, 35):
        oracle = bl.SimulatedOracle(params, sim_cfg, domain, attractors)
        _, rep = uniform_baseline(domain, k, oracle, False, truth50.unit_states, truth50.labels)
        f1s.append(rep.macro_f1)
        assert oracle.queries == k * k
    assert f1s == sorted(f1s)


def test_uniform_with_ast_reaches_high_f1_at_k8(domain, oracle, truth50):
    samples, rep = uniform_baseline(domain, 8, oracle, True, truth50.unit_states, truth50.labels)
    assert oracle.queries == 64
    assert len(samples) > 64  # harvesting multiplies the labels
    assert rep.macro_f1 >= 0.9


def test_first_crossing_semantics():
    values = np.array([0.2, 0.5, 0.55, 0.81, 0.79, 0.92])
    labels_at = np.array([1, 2, 3, 4, 5, 6])
    assert first_crossing(values, labels_at, 0.5) == 2
    assert first_crossing(values, labels_at, 0.8) == 4
    # the count before the crossing is below the threshold
    assert values[2] < 0.8
    assert first_crossing(values, labels_at, 0.95) is None


def test_f1_series_fill_forward():
    metrics = [
        {"queries": 3, "macro_f1": 0.4},
        {"queries": 4, "macro_f1": None},
        {"queries": 5, "macro_f1": 0.7},
    ]
    steps = f1_series_to_steps(metrics, cap=7)
    assert np.allclose(steps, [0.0, 0.0, 0.4, 0.4, 0.7, 0.7, 0.7])


def test_knn_exact_and_majority():
    states = np.array([[0.1, 0.1], [0.9, 0.9], [0.8, 0.8], [0.85, 0.9]])
    labels = np.array([0, 1, 1, 0])
    from basinlearn.trajectory_sampling import LabeledSample
    samples = [
        LabeledSample(state=s, label=int(l), provenance="queried",
                      source_query=i, remaining_length=1)
        for i, (s, l) in enumerate(zip(states, labels))
    ]
    knn1 = bl.knn_export(samples, k=1)
    assert knn1.predict(np.array([0.1, 0.1])) == 0
    assert knn1.predict(np.array([0.9, 0.9])) == 1
    knn3 = bl.knn_export(samples, k=3)
    assert knn3.predict(np.array([0.85, 0.85])) == 1  # 2-vs-1 vote


def test_knn_json_roundtrip():
    from basinlearn.trajectory_sampling import LabeledSample
    samples = [
        LabeledSample(state=np.array([0.2, 0.3]), label=0, provenance="queried",
                      source_query=0, remaining_length=1),
        LabeledSample(state=np.array([0.7, 0.6]), label=1, provenance="trajectory",
                      source_query=0, remaining_length=1),
        LabeledSample(state=np.array([0.6, 0.7]), label=1, provenance="trajectory",
                      source_query=0, remaining_length=1),
    ]
    knn = bl.knn_export(samples, k=3)
    back = KnnClassifier.from_json(knn.to_json())
    probes = np.random.default_rng(0).uniform(0, 1, (10, 2))
    assert np.array_equal(np.asarray(knn.predict(probes)), np.asarray(back.predict(probes)))


def test_knn_validation():
    from basinlearn.trajectory_sampling import LabeledSample
    samples = [LabeledSample(state=np.zeros(2), label=0, provenance="queried",
                             source_query=0, remaining_length=1)] * 3
    with pytest.raises(TrainingError):
        bl.knn_export(samples, k=2)
    with pytest.raises(TrainingError):
        bl.knn_export(samples[:1], k=3)


def test_macro_f1_helper(truth50):
    assert macro_f1(truth50.labels, truth50.labels) == 1.0
