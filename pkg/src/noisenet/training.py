"""Training loop, stratified k-fold cross-validation, and metrics.

Each training run draws bootstrap batches (uniform with replacement),
takes Adam steps, and periodically evaluates on the validation split.
Cross-validation repeats this over stratified folds with several weight
initializations per fold, refitting duration statistics on each training
split so nothing leaks from validation data.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DatasetTooSmall,
    EmptyDataset,
    ShapeMismatch,
    SingleClassTrainingSet,
    UnlabeledEvent,
)
from .events import CLASSES, NoiseEvent
from .ingest import Dataset
from .nn.adam import AdamState, adam_step
from .nn.network import (
    INFER,
    TRAIN,
    Network,
    NetworkConfig,
    backward,
    forward_arrays,
    init_network,
)
from .nn.layers import cross_entropy
from .preprocess import DEFAULT_WIDTH, fit_duration_stats, interpolate_event, normalize


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 2000
    steps: int = 300
    seed: int = 0
    eval_every: int = 25
    width: int = DEFAULT_WIDTH
    network: NetworkConfig = field(default_factory=NetworkConfig)

    def __post_init__(self) -> None:
        if self.batch_size < 2:
            raise ShapeMismatch(f"batch_size must be >= 2, got {self.batch_size}")
        if self.steps < 1:
            raise ShapeMismatch(f"steps must be >= 1, got {self.steps}")
        if self.width != self.network.input_cols:
            raise ShapeMismatch(
                f"width {self.width} does not match network input_cols {self.network.input_cols}"
            )


@dataclass(frozen=True)
class EvalPoint:
    step: int
    train_loss: float
    val_accuracy: float


@dataclass(frozen=True)
class RunRecord:
    fold: int
    seed_index: int
    accuracy: float
    confusion: tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class CvReport:
    runs: tuple[RunRecord, ...]
    k: int
    seeds_per_fold: int

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.runs]

    @property
    def median_accuracy(self) -> float:
        return float(np.median(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies))  # population std

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seeds_per_fold": self.seeds_per_fold,
            "median_accuracy": self.median_accuracy,
            "std_accuracy": self.std_accuracy,
            "runs": [
                {
                    "fold": r.fold,
                    "seed_index": r.seed_index,
                    "accuracy": r.accuracy,
                    "confusion": [list(row) for row in r.confusion],
                }
                for r in self.runs
            ],
        }


class MatrixCache:
    """Shared per-event interpolation+normalization results.

    The normalized matrix depends only on the event and the width, never
    on the training split, so it is safe to share across folds and seeds.
    Duration features are split-dependent and are not cached here.
    """

    def __init__(self, width: int = DEFAULT_WIDTH):
        self.width = width
        self._matrices: dict[str, np.ndarray] = {}

    def matrix(self, event: NoiseEvent) -> np.ndarray:
        got = self._matrices.get(event.event_id)
        if got is None:
            got = normalize(interpolate_event(event, self.width))
            self._matrices[event.event_id] = got
        return got


def _labels_array(events) -> np.ndarray:
    labels = []
    for e in events:
        if e.label is None:
            raise UnlabeledEvent(f"event {e.event_id} has no label")
        labels.append(CLASSES.index(e.label.class_))
    return np.array(labels, dtype=np.int64)


def _prepare(events, stats, cache: MatrixCache):
    x = np.stack([cache.matrix(e) for e in events])[:, None, :, :]
    durations = np.array([stats.standardize(len(e.frames)) for e in events])
    return x, durations


def bootstrap_batch(dataset: Dataset, size: int, seed: int, step: int) -> list[NoiseEvent]:
    """Uniform draw with replacement, deterministic in (seed, step)."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot draw a bootstrap batch from an empty dataset")
    rng = np.random.default_rng(np.random.SeedSequence([seed, step]))
    idx = rng.integers(0, len(dataset.events), size=size)
    return [dataset.events[i] for i in idx]


def _bootstrap_indices(n: int, size: int, seed: int, step: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, step]))
    return rng.integers(0, n, size=size)


def evaluate_probs(probs: np.ndarray, labels: np.ndarray):
    """Accuracy and confusion matrix from predicted probabilities.

    Argmax decision with ties broken toward class index 0.
    """
    pred = np.where(probs[:, 0] >= probs[:, 1], 0, 1)
    confusion = np.zeros((2, 2), dtype=np.int64)
    for t, p in zip(labels, pred):
        confusion[t, p] += 1
    accuracy = float((pred == labels).mean()) if len(labels) else 0.0
    return accuracy, confusion


def evaluate(net: Network, dataset: Dataset, cache: MatrixCache | None = None):
    """Infer-mode accuracy and confusion matrix over labeled events."""
    if cache is None:
        cache = MatrixCache(net.config.input_cols)
    labels = _labels_array(dataset.events)
    x, durations = _prepare(dataset.events, net.duration_stats, cache)
    probs = forward_arrays(net, x, durations, INFER)
    accuracy, confusion = evaluate_probs(probs, labels)
    return accuracy, confusion


def train(
    train_set: Dataset,
    val_set: Dataset,
    config: TrainConfig,
    cache: MatrixCache | None = None,
) -> tuple[Network, list[EvalPoint]]:
    """Train a fresh network on bootstrap batches of the training set.

    Duration statistics are fitted on the training set only. Bit
    deterministic for a given (seed, config, dataset order). A zero
    learning rate is a test-only null mode: the initialized network is
    returned untouched (running statistics included).
    """
    classes_present = {e.label.class_ for e in train_set.events if e.label is not None}
    if len(classes_present) < 2:
        raise SingleClassTrainingSet(f"training set has classes {sorted(classes_present)}")
    if cache is None:
        cache = MatrixCache(config.width)

    stats = fit_duration_stats(train_set.events)
    train_labels = _labels_array(train_set.events)
    train_x, train_dur = _prepare(train_set.events, stats, cache)
    val_labels = _labels_array(val_set.events) if len(val_set) else np.empty(0, dtype=np.int64)
    if len(val_set):
        val_x, val_dur = _prepare(val_set.events, stats, cache)

    net = init_network(config.network, seed=config.seed, duration_stats=stats)
    dropout_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xD0]))
    adam = AdamState.for_network(net)
    cfg = config.network
    history: list[EvalPoint] = []
    null_training = cfg.learning_rate == 0.0

    def _val_accuracy() -> float:
        if not len(val_set):
            return float("nan")
        net.mode = INFER
        probs = forward_arrays(net, val_x, val_dur, INFER)
        return evaluate_probs(probs, val_labels)[0]

    n = len(train_set.events)
    for step in range(1, config.steps + 1):
        idx = _bootstrap_indices(n, config.batch_size, config.seed, step)
        bx, bdur, blabels = train_x[idx], train_dur[idx], train_labels[idx]
        if null_training:
            loss = cross_entropy(forward_arrays(net, bx, bdur, INFER), blabels)
        else:
            net.mode = TRAIN
            probs = forward_arrays(
                net, bx, bdur, TRAIN, dropout_rng=dropout_rng, keep_cache=True
            )
            loss = cross_entropy(probs, blabels)
            grads = backward(net, blabels)
            net._cache = None
            adam_step(
                net.params, grads, adam, cfg.learning_rate,
                beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_epsilon,
            )
        if step % config.eval_every == 0 or step == config.steps:
            history.append(EvalPoint(step=step, train_loss=loss, val_accuracy=_val_accuracy()))

    net.mode = INFER
    return net, history


def stratified_folds(dataset: Dataset, k: int, seed: int) -> list[list[int]]:
    """Deterministic class-stratified partition into k index folds."""
    if len(dataset) < k:
        raise DatasetTooSmall(f"dataset of {len(dataset)} events cannot make {k} folds")
    rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
    folds: list[list[int]] = [[] for _ in range(k)]
    for class_ in CLASSES:
        idx = [i for i, e in enumerate(dataset.events) if e.label and e.label.class_ == class_]
        order = rng.permutation(len(idx))
        for j, pos in enumerate(order):
            folds[j % k].append(idx[pos])
    return [sorted(f) for f in folds]


def _run_one(args) -> RunRecord:
    dataset, fold_indices, fold, seed_index, config, cache = args
    holdout = set(fold_indices)
    train_events = [e for i, e in enumerate(dataset.events) if i not in holdout]
    val_events = [dataset.events[i] for i in fold_indices]
    run_seed = int(
        np.random.SeedSequence([config.seed, fold, seed_index]).generate_state(1)[0]
    )
    run_config = replace(config, seed=run_seed)
    net, _ = train(
        Dataset.from_events(train_events), Dataset.from_events(val_events), run_config, cache
    )
    accuracy, confusion = evaluate(net, Dataset.from_events(val_events), cache)
    return RunRecord(
        fold=fold,
        seed_index=seed_index,
        accuracy=accuracy,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
    )


def kfold_cv(
    dataset: Dataset,
    config: TrainConfig,
    k: int = 10,
    seeds_per_fold: int = 5,
    workers: int = 1,
) -> CvReport:
    """Stratified k-fold cross-validation with repeated initializations.

    Returns one accuracy per (fold, seed) run plus the median and
    population standard deviation. Deterministic regardless of worker
    count; each run's seed derives from (config.seed, fold, seed_index).
    """
    folds = stratified_folds(dataset, k, config.seed)
    cache = MatrixCache(config.width)
    jobs = [
        (dataset, folds[fold], fold, seed_index, config, cache)
        for fold in range(k)
        for seed_index in range(seeds_per_fold)
    ]
    if workers > 1:
        # each worker re-derives its matrices; the cache is not shared
        jobs = [(d, f, a, b, c, None) for (d, f, a, b, c, _) in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(job) for job in jobs]
    return CvReport(runs=tuple(runs), k=k, seeds_per_fold=seeds_per_fold)


def accuracy_histogram(accuracies, bin_width: float = 0.01) -> list[tuple[float, int]]:
    """Left-closed bins over [0, 1]; the final bin also includes 1.0."""
    n_bins = int(round(1.0 / bin_width))
    counts = [0] * n_bins
    for a in accuracies:
        if not (0.0 <= a <= 1.0):
            raise ShapeMismatch(f"accuracy {a} outside [0, 1]")
        b = min(int(a / bin_width), n_bins - 1)
        counts[b] += 1
    return [(i * bin_width, counts[i]) for i in range(n_bins)]


def write_report_json(report: CvReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")


def write_histogram_csv(accuracies, path, bin_width: float = 0.01) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lower_edge", "count"])
        for edge, count in accuracy_histogram(accuracies, bin_width):
            writer.writerow([f"{edge:.6g}", count])


def write_accuracies_csv(report: CvReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "seed_index", "accuracy"])
        for r in report.runs:
            writer.writerow([r.fold, r.seed_index, f"{r.accuracy:.10g}"])
