import numpy as np
import pytest

from dynood.evaluation import (
    accuracy,
    auc,
    auc_arrays,
    load_negatives,
    ood_split_links,
    parse_rule,
    render_text,
    report,
    sample_negative_pairs,
    save_negatives,
    series,
    trend_spearman,
    write_report,
    write_series,
)
from dynood.evaluation.runner import evaluate_checkpoint, evaluate_pair
from dynood.graph_core.graph import build_snapshot, link_targets
from dynood.graph_core.schemas import DynamicGraph, LabelKind, LabelSet
from dynood.shared.exceptions import ContractViolation, DomainError, UndefinedMetricError
from dynood.synthetic_data import EnvMode, EnvSuiteSpec, SbmSpec, gen_env_suite, gen_sbm_node_cls
from dynood.training import Ablation, TrainConfig, train

EXPERIMENT = dict(
    hidden_dim=16, attention_heads=2, layers=1, static_dim=4, dynamic_dim=8, decoder_hidden=16,
    clusters=4, top_k=2, kmeans_restarts=2, generated_per_timestamp=8, learning_rate=1e-2, epochs=40,
)


def pair_counting_auc(scores, labels):
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in positives:
        for n in negatives:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(positives) * len(negatives))


@pytest.fixture
def tagged_graph():
    """Edges tagged "a" or "b"; T + 1 labels carry tags too."""
    rng = np.random.default_rng(0)
    edges = [[(0, 1), (1, 2), (2, 3), (3, 4)], [(0, 2), (1, 3), (2, 4), (0, 4)], [(0, 1), (1, 4), (2, 3), (3, 4)]]
    snapshots = []
    for t, pairs in enumerate(edges, start=1):
        tags = {pair: "a" if i % 2 == 0 else "b" for i, pair in enumerate(pairs)}
        snapshots.append(build_snapshot(5, pairs, rng.standard_normal((5, 3)), t, tags))
    labels = LabelSet(
        kind=LabelKind.LINK_OCCURRENCE,
        links=((0, 1, 4), (1, 2, 4), (3, 4, 4)),
        link_tags={(0, 1, 4): "a", (1, 2, 4): "b", (3, 4, 4): "a"},
    )
    return DynamicGraph(snapshots=tuple(snapshots), node_count=5, labels=labels)


def test_auc_examples():
    assert auc([(0.9, 1), (0.8, 0), (0.7, 1), (0.1, 0)]) == pytest.approx(0.75)
    assert auc([(0.9, 1), (0.8, 1), (0.2, 0)]) == 1.0
    assert auc([(0.5, 1), (0.5, 0)]) == 0.5


def test_auc_matches_pair_counting():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        scores = rng.integers(0, 6, size=30) / 5.0
        labels = rng.integers(0, 2, size=30)
        labels[:2] = [0, 1]
        assert auc_arrays(scores, labels) == pytest.approx(pair_counting_auc(scores, labels))


def test_auc_properties():
    rng = np.random.default_rng(1)
    scores = rng.random(200)
    labels = rng.integers(0, 2, size=200)
    base = auc_arrays(scores, labels)
    assert auc_arrays(np.exp(3 * scores) - 7, labels) == pytest.approx(base)
    assert auc_arrays(scores, 1 - labels) == pytest.approx(1 - base)


def test_random_scores_give_half():
    rng = np.random.default_rng(2)
    assert auc_arrays(rng.random(20000), rng.integers(0, 2, size=20000)) == pytest.approx(0.5, abs=0.02)


def test_auc_needs_both_classes():
    with pytest.raises(UndefinedMetricError):
        auc([(0.3, 1), (0.4, 1)])
    with pytest.raises(UndefinedMetricError):
        auc([])


def test_accuracy_examples():
    assert accuracy([0, 1, 2], [0, 1, 2]) == 1.0
    assert accuracy([1, 1], [0, 0]) == 0.0
    assert accuracy([0, 1, 1, 0], [0, 1, 1, 1]) == 0.75
    with pytest.raises(ContractViolation):
        accuracy([0, 1], [0])
    with pytest.raises(UndefinedMetricError):
        accuracy([], [])


def test_report_examples():
    single = report([(0.8, None)], seeds=[3])
    assert single.std == 0.0
    assert single.value_ood is None
    assert single.seeds == [3]

    cell = report([(80.0, 60.0)])
    assert cell.delta == pytest.approx(20.0)
    assert cell.delta_pct == pytest.approx(25.0)

    same = report([(0.7, 0.7), (0.9, 0.9)])
    assert same.delta == 0.0
    assert same.delta_pct == 0.0
    assert same.std == pytest.approx(np.std([0.7, 0.9], ddof=1))


def test_report_edge_cases():
    assert report([(0.0, 0.0)]).delta_pct is None
    with pytest.raises(ContractViolation):
        report([])
    with pytest.raises(ContractViolation):
        report([(0.8, 0.6), (0.7, None)])


def test_render_text_and_write_report(tmp_path):
    reports = [report([(0.8, 0.6), (0.9, 0.7)], seeds=[0, 1]), report([(0.5, 0.4)], metric="accuracy")]
    text = render_text(reports)
    assert "23.53%" in text
    assert "20.00%" in text
    assert "0.8500" in text
    assert "0 1" in text
    write_report(reports, tmp_path / "report.csv", tmp_path / "report.txt")
    header = (tmp_path / "report.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["metric", "value", "std"]
    assert "delta_pct" in header
    assert (tmp_path / "report.txt").read_text() == text


def test_render_text_without_ood_drops_columns():
    text = render_text([report([(0.8, None)])])
    assert "delta" not in text
    assert "value_ood" not in text


def test_trend_and_series(tmp_path):
    assert trend_spearman([0.1, 0.2, 0.3], [3.0, 2.0, 1.0]) == pytest.approx(-1.0)
    with pytest.raises(ContractViolation):
        trend_spearman([0.1], [1.0])
    points = series([0.0, 0.5], [[0.6, 0.8], [0.9]])
    assert points[0].mean == pytest.approx(0.7)
    assert points[1].std == 0.0
    write_series(points, tmp_path / "series.csv")
    assert (tmp_path / "series.csv").read_text().splitlines()[0] == "x,mean,std"


def test_parse_rule():
    assert parse_rule(None) == frozenset()
    assert parse_rule("a, b,,") == frozenset({"a", "b"})
    assert parse_rule(["c"]) == frozenset({"c"})


def test_empty_rule_keeps_views_identical(tagged_graph):
    train_view, test_view = ood_split_links(tagged_graph, "")
    assert train_view is tagged_graph
    assert test_view is tagged_graph


def test_rule_withholds_tagged_edges(tagged_graph):
    train_view, test_view = ood_split_links(tagged_graph, "b")
    assert test_view is tagged_graph
    for filtered, original in zip(train_view.snapshots, tagged_graph.snapshots):
        assert "b" not in filtered.edge_tags.values()
        assert len(filtered.edges()) == 2
        assert filtered.adjacency.sum() == 4
        assert np.array_equal(filtered.features, original.features)
    assert train_view.node_count == tagged_graph.node_count
    assert {link[:2] for link in train_view.labels.links} == {(0, 1), (3, 4)}


def test_rule_matching_nothing_warns(tagged_graph, caplog):
    train_view, _ = ood_split_links(tagged_graph, "z")
    assert "matched no edges" in caplog.text
    assert all(a.equals(b) for a, b in zip(train_view.snapshots, tagged_graph.snapshots))


def test_rule_matching_everything_fails(tagged_graph):
    with pytest.raises(DomainError):
        ood_split_links(tagged_graph, "a,b")


def test_negatives_are_seeded_and_persisted(tiny_graph, tmp_path):
    negatives = sample_negative_pairs(tiny_graph, (2, 4), seed=7)
    again = sample_negative_pairs(tiny_graph, (2, 4), seed=7)
    assert set(negatives) == {2, 3, 4}
    for t, pairs in negatives.items():
        assert np.array_equal(pairs, again[t])
        assert len(pairs) == len(link_targets(tiny_graph, t))
        assert np.all(pairs[:, 0] < pairs[:, 1])
        positives = {tuple(p) for p in link_targets(tiny_graph, t).tolist()}
        assert not positives & {tuple(p) for p in pairs.tolist()}
    save_negatives(negatives, tmp_path / "negatives.ntc", seed=7)
    loaded = load_negatives(tmp_path / "negatives.ntc")
    assert set(loaded) == set(negatives)
    assert all(np.array_equal(loaded[t], negatives[t]) for t in negatives)


def test_evaluate_pair_shares_negatives(tagged_graph):
    cfg = TrainConfig(
        hidden_dim=8, attention_heads=2, layers=1, static_dim=4, dynamic_dim=4, decoder_hidden=8,
        clusters=2, top_k=1, kmeans_restarts=1, generated_per_timestamp=2, rounds=2, epochs=1,
        train_range=(2, 2), val_range=(3, 3), test_range=(4, 4),
    )
    model = train(tagged_graph, cfg).model
    plain, none = evaluate_pair(model, tagged_graph, (4, 4), "")
    assert none is None
    assert set(plain.per_timestamp) == {4}
    in_dist, ood = evaluate_pair(model, tagged_graph, (4, 4), "b")
    assert 0.0 <= in_dist.mean <= 1.0
    assert 0.0 <= ood.mean <= 1.0
    assert evaluate_checkpoint(model, tagged_graph, (4, 4)).mean == pytest.approx(plain.mean)


def fit_on(dataset, seed, ablation=Ablation.NONE):
    splits = dataset.splits
    cfg = TrainConfig(
        **EXPERIMENT, task=dataset.task, seed=seed,
        train_range=splits["train"], val_range=splits["val"], test_range=splits["test"],
    ).with_ablation(ablation)
    return train(dataset.graph, cfg).model


def split_metric(model, dataset, split, seed):
    return evaluate_checkpoint(model, dataset.graph, dataset.splits[split], seed=seed).mean


@pytest.mark.slow
def test_interventions_narrow_the_sbm_shift_gap():
    wins = 0
    gaps = {Ablation.NONE: [], Ablation.NO_INTERVENTION: []}
    for level in (0.4, 0.6, 0.8):
        test_metric = {ablation: [] for ablation in gaps}
        for seed in range(3):
            dataset = gen_sbm_node_cls(SbmSpec(shift_level=level, seed=seed))
            for ablation in gaps:
                model = fit_on(dataset, seed, ablation)
                shifted = split_metric(model, dataset, "test", seed)
                test_metric[ablation].append(shifted)
                gaps[ablation].append(split_metric(model, dataset, "train", seed) - shifted)
        if np.mean(test_metric[Ablation.NONE]) >= np.mean(test_metric[Ablation.NO_INTERVENTION]):
            wins += 1
    assert wins >= 2
    assert np.mean(gaps[Ablation.NO_INTERVENTION]) >= 0.0
    assert np.mean(gaps[Ablation.NONE]) <= np.mean(gaps[Ablation.NO_INTERVENTION])


@pytest.mark.slow
def test_full_model_matches_or_beats_its_ablations():
    spec = EnvSuiteSpec(mode=EnvMode.NONSTATIONARY, gamma_dyn=0.6)
    variants = (Ablation.NONE, Ablation.NO_ESVAE, Ablation.NO_INTERVENTION)
    scores = {ablation: [] for ablation in variants}
    for seed in range(3):
        dataset = gen_env_suite(spec.model_copy(update={"seed": seed}))
        for ablation in variants:
            scores[ablation].append(split_metric(fit_on(dataset, seed, ablation), dataset, "test", seed))
    full = np.mean(scores[Ablation.NONE])
    for ablation in variants[1:]:
        spread = max(np.std(scores[Ablation.NONE]), np.std(scores[ablation]))
        assert full >= np.mean(scores[ablation]) - spread, ablation.value


def seed_means(specs):
    means = []
    for spec in specs:
        values = []
        for seed in range(3):
            dataset = gen_env_suite(spec.model_copy(update={"seed": seed}))
            values.append(split_metric(fit_on(dataset, seed), dataset, "test", seed))
        means.append(float(np.mean(values)))
    return means


@pytest.mark.slow
def test_auc_rises_with_invariant_environments():
    levels = [0.25, 0.5, 0.75, 1.0]
    means = seed_means([EnvSuiteSpec(gamma_inv=level) for level in levels])
    assert trend_spearman(levels, means) > 0


@pytest.mark.slow
def test_auc_does_not_rise_with_dynamic_features():
    levels = [0.0, 0.3, 0.6, 0.9]
    means = seed_means([EnvSuiteSpec(mode=EnvMode.NONSTATIONARY, gamma_dyn=level) for level in levels])
    assert trend_spearman(levels, means) <= 0
