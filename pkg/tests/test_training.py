import dataclasses

import numpy as np
import pytest

from noisenet.errors import (
    DatasetTooSmall,
    EmptyDataset,
    ShapeMismatch,
    SingleClassTrainingSet,
    UnlabeledEvent,
)
from noisenet.ingest import Dataset
from noisenet.nn.network import PARAM_NAMES, NetworkConfig
from noisenet.training import (
    CvReport,
    MatrixCache,
    TrainConfig,
    accuracy_histogram,
    bootstrap_batch,
    evaluate,
    evaluate_probs,
    kfold_cv,
    stratified_folds,
    train,
)

from helpers import balanced_dataset, make_event, make_random_event


def small_config(steps=6, batch=8, seed=3, **net_kw):
    network = NetworkConfig(
        input_rows=37, input_cols=15, conv1_filters=2, conv2_filters=3, dense_hidden=8,
        **net_kw,
    )
    return TrainConfig(batch_size=batch, steps=steps, seed=seed, eval_every=3,
                       width=15, network=network)


class TestBootstrapBatch:
    def test_draws_with_replacement(self):
        rng = np.random.default_rng(0)
        dataset = balanced_dataset(rng, 405)  # 810 events
        batch = bootstrap_batch(dataset, 2000, seed=1, step=1)
        assert len(batch) == 2000
        assert len({e.event_id for e in batch}) < 2000  # pigeonhole: duplicates

    def test_deterministic_in_seed_and_step(self):
        rng = np.random.default_rng(0)
        dataset = balanced_dataset(rng, 10)
        a = bootstrap_batch(dataset, 50, seed=9, step=4)
        b = bootstrap_batch(dataset, 50, seed=9, step=4)
        c = bootstrap_batch(dataset, 50, seed=9, step=5)
        assert [e.event_id for e in a] == [e.event_id for e in b]
        assert [e.event_id for e in a] != [e.event_id for e in c]

    def test_single_event_dataset(self):
        rng = np.random.default_rng(0)
        event = make_random_event(rng, "only", 5, label="aircraft")
        batch = bootstrap_batch(Dataset.from_events([event]), 1, seed=0, step=0)
        assert batch == [event]

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            bootstrap_batch(Dataset.from_events([]), 4, seed=0, step=0)

    def test_uniformity(self):
        rng = np.random.default_rng(0)
        dataset = balanced_dataset(rng, 5)  # 10 events
        counts = {e.event_id: 0 for e in dataset.events}
        draws = 100_000
        batch = bootstrap_batch(dataset, draws, seed=11, step=0)
        for e in batch:
            counts[e.event_id] += 1
        se = np.sqrt(0.1 * 0.9 / draws)
        for event_id, count in counts.items():
            assert abs(count / draws - 0.1) <= 3.0 * se, event_id


class TestTrain:
    def test_single_class_guard(self):
        rng = np.random.default_rng(1)
        events = [make_random_event(rng, f"a-{i}", 5 + i, label="aircraft") for i in range(6)]
        dataset = Dataset.from_events(events)
        with pytest.raises(SingleClassTrainingSet):
            train(dataset, dataset, small_config())

    def test_null_training_returns_initial_network(self):
        rng = np.random.default_rng(2)
        dataset = balanced_dataset(rng, 8, min_dur=5, max_dur=20)
        val = balanced_dataset(np.random.default_rng(3), 3, min_dur=5, max_dur=20)
        config = small_config(learning_rate=0.0)
        net, history = train(dataset, val, config)
        from noisenet.nn.network import init_network
        from noisenet.preprocess import fit_duration_stats

        reference = init_network(config.network, seed=config.seed,
                                 duration_stats=fit_duration_stats(dataset.events))
        for name in PARAM_NAMES:
            assert np.array_equal(net.params[name], reference.params[name])
        for name in net.stats:
            assert np.array_equal(net.stats[name], reference.stats[name])
        assert evaluate(net, val)[0] == evaluate(reference, val)[0]
        assert history  # evals still recorded

    def test_bit_deterministic(self):
        rng = np.random.default_rng(4)
        dataset = balanced_dataset(rng, 8)
        val = balanced_dataset(np.random.default_rng(5), 3)
        config = small_config()
        net_a, hist_a = train(dataset, val, config)
        net_b, hist_b = train(dataset, val, config)
        for name in PARAM_NAMES:
            assert np.array_equal(net_a.params[name], net_b.params[name])
        for name in net_a.stats:
            assert np.array_equal(net_a.stats[name], net_b.stats[name])
        assert hist_a == hist_b

    def test_history_cadence(self):
        rng = np.random.default_rng(6)
        dataset = balanced_dataset(rng, 8)
        net, history = train(dataset, dataset, small_config(steps=7))
        assert [h.step for h in history] == [3, 6, 7]

    def test_no_leakage_from_validation(self):
        rng = np.random.default_rng(7)
        dataset = balanced_dataset(rng, 8)
        val_a = balanced_dataset(np.random.default_rng(8), 3)
        val_b = balanced_dataset(np.random.default_rng(9), 3)  # different val events
        config = small_config()
        net_a, _ = train(dataset, val_a, config)
        net_b, _ = train(dataset, val_b, config)
        for name in PARAM_NAMES:
            assert np.array_equal(net_a.params[name], net_b.params[name])

    def test_learns_separable_synthetic(self):
        from noisenet.synthetic import generate_synthetic_dataset

        dataset = generate_synthetic_dataset(100, seed=21, difficulty=0.0)
        config = TrainConfig(batch_size=128, steps=150, seed=2, eval_every=75)
        net, _ = train(dataset, dataset, config)
        accuracy, _ = evaluate(net, dataset)
        assert accuracy >= 0.99


class TestEvaluate:
    def test_all_correct(self):
        probs = np.array([[0.9, 0.1], [0.2, 0.8]])
        accuracy, confusion = evaluate_probs(probs, np.array([0, 1]))
        assert accuracy == 1.0
        assert confusion.tolist() == [[1, 0], [0, 1]]

    def test_all_inverted(self):
        probs = np.array([[0.1, 0.9], [0.8, 0.2]])
        accuracy, _ = evaluate_probs(probs, np.array([0, 1]))
        assert accuracy == 0.0

    def test_three_of_four(self):
        probs = np.array([[0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9]])
        accuracy, confusion = evaluate_probs(probs, np.array([0, 1, 1, 1]))
        assert accuracy == 0.75
        assert confusion.tolist() == [[1, 0], [1, 2]]

    def test_tie_goes_to_class_zero(self):
        accuracy, _ = evaluate_probs(np.array([[0.5, 0.5]]), np.array([0]))
        assert accuracy == 1.0

    def test_unlabeled_event_rejected(self):
        rng = np.random.default_rng(1)
        dataset = Dataset.from_events([make_random_event(rng, "u", 5)])
        config = small_config()
        labeled = balanced_dataset(rng, 6)
        net, _ = train(labeled, labeled, config)
        with pytest.raises(UnlabeledEvent):
            evaluate(net, dataset, MatrixCache(15))


class TestStratifiedFolds:
    def test_proportions_within_one_event(self):
        rng = np.random.default_rng(10)
        dataset = balanced_dataset(rng, 45)
        folds = stratified_folds(dataset, 10, seed=0)
        for fold in folds:
            labels = [dataset.events[i].label.class_ for i in fold]
            assert abs(labels.count("aircraft") - labels.count("community")) <= 1

    def test_partition_is_complete_and_disjoint(self):
        rng = np.random.default_rng(11)
        dataset = balanced_dataset(rng, 13)
        folds = stratified_folds(dataset, 5, seed=1)
        everything = sorted(i for fold in folds for i in fold)
        assert everything == list(range(len(dataset.events)))

    def test_too_small(self):
        rng = np.random.default_rng(12)
        dataset = balanced_dataset(rng, 2)
        with pytest.raises(DatasetTooSmall):
            stratified_folds(dataset, 10, seed=0)


class TestKfoldCv:
    def test_minimal_protocol(self):
        events = [
            make_event("a1", duration=10, label="aircraft"),
            make_event("c1", duration=20, label="community"),
            make_event("a2", duration=30, label="aircraft"),
            make_event("c2", duration=40, label="community"),
        ]
        dataset = Dataset.from_events(events)
        config = small_config(steps=2, batch=2)
        report = kfold_cv(dataset, config, k=2, seeds_per_fold=1)
        assert len(report.runs) == 2
        assert all(0.0 <= r.accuracy <= 1.0 for r in report.runs)

    def test_run_count_is_k_times_seeds(self):
        rng = np.random.default_rng(13)
        dataset = balanced_dataset(rng, 6)
        report = kfold_cv(dataset, small_config(steps=2, batch=4), k=3, seeds_per_fold=2)
        assert len(report.runs) == 6
        assert report.k == 3 and report.seeds_per_fold == 2

    def test_deterministic(self):
        rng = np.random.default_rng(14)
        dataset = balanced_dataset(rng, 6)
        config = small_config(steps=3, batch=4)
        a = kfold_cv(dataset, config, k=2, seeds_per_fold=2)
        b = kfold_cv(dataset, config, k=2, seeds_per_fold=2)
        assert a == b

    def test_report_statistics(self):
        runs = [
            dataclasses.replace(r, accuracy=a)
            for r, a in zip(
                kfold_cv(
                    balanced_dataset(np.random.default_rng(15), 4),
                    small_config(steps=2, batch=4),
                    k=2,
                    seeds_per_fold=1,
                ).runs,
                [0.8, 0.9],
            )
        ]
        report = CvReport(runs=tuple(runs), k=2, seeds_per_fold=1)
        assert report.median_accuracy == pytest.approx(0.85)
        assert report.std_accuracy == pytest.approx(0.05)


class TestAccuracyHistogram:
    def test_counting(self):
        bins = dict(accuracy_histogram([0.97, 0.97, 0.98]))
        assert bins[0.97] == 2
        assert bins[0.98] == 1

    def test_empty(self):
        bins = accuracy_histogram([])
        assert len(bins) == 100
        assert all(count == 0 for _, count in bins)

    def test_one_point_zero_in_final_bin(self):
        bins = dict(accuracy_histogram([1.0]))
        assert bins[0.99] == 1

    def test_counts_sum_to_input_length(self):
        rng = np.random.default_rng(16)
        accuracies = rng.uniform(0, 1, size=137).tolist()
        bins = accuracy_histogram(accuracies)
        assert sum(count for _, count in bins) == 137

    def test_rejects_out_of_range(self):
        with pytest.raises(ShapeMismatch):
            accuracy_histogram([1.2])
