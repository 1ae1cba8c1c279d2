"""Operator command line: every pipeline stage as a subcommand.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
Each run logs its fully resolved configuration to standard error. Train
and cv read an optional JSON config file; explicit flags win over it.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataError, NoiseNetError
from .ingest import Dataset, LevelStream, detect_events, load_dataset, save_dataset
from .nn.checkpoint import load_checkpoint, save_checkpoint
from .nn.gradcheck import gradient_check
from .nn.network import NetworkConfig, init_network
from .synthetic import generate_synthetic_dataset
from .training import (
    TrainConfig,
    kfold_cv,
    train,
    write_accuracies_csv,
    write_histogram_csv,
    write_report_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _log_config(name: str, config: dict) -> None:
    print(f"[{name}] resolved config: {json.dumps(config, sort_keys=True)}", file=sys.stderr)


def _train_config(args) -> TrainConfig:
    """Config file first, then explicit flags override."""
    file_raw: dict = {}
    if getattr(args, "config", None):
        file_raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    network = NetworkConfig(**file_raw.pop("network", {}))
    merged = dict(file_raw)
    for key in ("batch_size", "steps", "seed", "eval_every", "width"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "learning_rate", None) is not None:
        network = dataclasses.replace(network, learning_rate=args.learning_rate)
    if getattr(args, "keep_prob", None) is not None:
        network = dataclasses.replace(network, keep_prob=args.keep_prob)
    return TrainConfig(network=network, **merged)


def _split_train_val(dataset: Dataset, seed: int, val_fraction: float = 0.1):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5E1]))
    order = rng.permutation(len(dataset.events))
    n_val = max(1, int(round(len(order) * val_fraction)))
    val_idx = set(int(i) for i in order[:n_val])
    train_events = [e for i, e in enumerate(dataset.events) if i not in val_idx]
    val_events = [dataset.events[i] for i in sorted(val_idx)]
    return Dataset.from_events(train_events), Dataset.from_events(val_events)


def cmd_ingest(args) -> int:
    _log_config("ingest", {"path": args.path})
    dataset = load_dataset(args.path)
    print(
        json.dumps(
            {
                "events": len(dataset),
                "class_counts": dataset.class_counts,
                "labeled": len(dataset.labeled()),
            }
        )
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    config = {
        "n_per_class": args.n_per_class,
        "seed": args.seed,
        "difficulty": args.difficulty,
        "out": args.out,
    }
    _log_config("synth", config)
    dataset = generate_synthetic_dataset(args.n_per_class, args.seed, args.difficulty)
    save_dataset(dataset, args.out)
    print(json.dumps({"written": len(dataset), "path": args.out}))
    return EXIT_OK


def cmd_train(args) -> int:
    config = _train_config(args)
    _log_config(
        "train",
        {
            "data": args.data,
            "out": args.out,
            **dataclasses.asdict(config),
        },
    )
    dataset = load_dataset(args.data)
    train_set, val_set = _split_train_val(dataset, config.seed)
    net, history = train(train_set, val_set, config)
    save_checkpoint(net, None, args.out)
    print(
        json.dumps(
            {
                "checkpoint": args.out,
                "history": [
                    {"step": h.step, "train_loss": h.train_loss, "val_accuracy": h.val_accuracy}
                    for h in history
                ],
            }
        )
    )
    return EXIT_OK


def cmd_cv(args) -> int:
    config = _train_config(args)
    _log_config(
        "cv",
        {
            "data": args.data,
            "k": args.k,
            "seeds": args.seeds,
            "report": args.report,
            "workers": args.workers,
            **dataclasses.asdict(config),
        },
    )
    dataset = load_dataset(args.data)
    report = kfold_cv(dataset, config, k=args.k, seeds_per_fold=args.seeds, workers=args.workers)
    write_report_json(report, args.report)
    base = Path(args.report).with_suffix("")
    write_accuracies_csv(report, f"{base}_accuracies.csv")
    write_histogram_csv(report.accuracies, f"{base}_histogram.csv")
    print(
        json.dumps(
            {
                "runs": len(report.runs),
                "median_accuracy": report.median_accuracy,
                "std_accuracy": report.std_accuracy,
                "report": args.report,
            }
        )
    )
    return EXIT_OK


def cmd_classify(args) -> int:
    _log_config("classify", {"model": args.model, "event": args.event})
    from .ingest import parse_event
    from .nn.network import INFER, forward_arrays
    from .preprocess import make_event_matrix
    from .active_learning import prediction_entropy

    net = load_checkpoint(args.model)
    text = Path(args.event).read_text(encoding="utf-8").strip()
    event = parse_event(text)
    matrix = make_event_matrix(event, net.duration_stats, net.config.input_cols)
    probs = forward_arrays(
        net, matrix.values[None, None, :, :], np.array([matrix.duration_feature]), INFER
    )[0]
    print(
        json.dumps(
            {
                "event_id": event.event_id,
                "probabilities": [float(p) for p in probs],
                "classes": ["aircraft", "community"],
                "entropy": prediction_entropy(probs),
                "model_version": net.version,
            }
        )
    )
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    network = NetworkConfig(keep_prob=1.0)
    if args.config:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        raw.setdefault("keep_prob", 1.0)
        network = NetworkConfig(**raw)
    _log_config("gradcheck", dataclasses.asdict(network) | {"tolerance": args.tolerance})
    rng = np.random.default_rng(args.seed)
    net = init_network(network, seed=args.seed)
    x = rng.normal(size=(args.batch, 1, network.input_rows, network.input_cols))
    durations = rng.normal(size=args.batch)
    labels = rng.integers(0, network.classes, size=args.batch)
    report = gradient_check(net, x, durations, labels, tolerance=args.tolerance)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_RUNTIME


def cmd_histogram(args) -> int:
    _log_config("histogram", {"report": args.report, "out": args.out, "bin_width": args.bin_width})
    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    accuracies = [r["accuracy"] for r in report["runs"]]
    write_histogram_csv(accuracies, args.out, bin_width=args.bin_width)
    print(json.dumps({"bins_written": int(round(1.0 / args.bin_width)), "out": args.out}))
    return EXIT_OK


def cmd_detect(args) -> int:
    _log_config("detect", {"stream": args.stream})
    timestamps = []
    levels = []
    with open(args.stream, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"timestamp", "dba"} <= set(reader.fieldnames):
            raise DataError(f"{args.stream}: expected CSV with 'timestamp,dba' header")
        for row in reader:
            timestamps.append(
                datetime.fromisoformat(row["timestamp"].replace("Z", "+00:00")).astimezone(
                    timezone.utc
                )
            )
            levels.append(float(row["dba"]))
    stream = LevelStream(tuple(timestamps), tuple(levels))
    windows = detect_events(stream)
    for start, end in windows:
        print(
            json.dumps(
                {
                    "start_index": start,
                    "end_index": end,
                    "start_time": timestamps[start].isoformat(),
                    "duration_seconds": end - start,
                }
            )
        )
    print(json.dumps({"events": len(windows)}), file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service.config import load_service_config
    from .service.app import serve

    config = load_service_config(args.config)
    _log_config("serve", config.to_dict())
    serve(config)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="noisenet", description="Aircraft-noise event classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a JSONL event dataset")
    p.add_argument("path", help="JSONL event file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--n-per-class", type=int, required=True, help="events per class")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--difficulty", type=float, default=0.25,
                   help="class overlap in [0,1] (default 0.25)")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=cmd_synth)

    def add_train_flags(p):
        p.add_argument("--config", help="JSON config file (flags win over it)")
        p.add_argument("--batch-size", dest="batch_size", type=int, default=None,
                       help="bootstrap batch size (default 2000)")
        p.add_argument("--steps", type=int, default=None, help="optimizer steps (default 300)")
        p.add_argument("--seed", type=int, default=None, help="training seed (default 0)")
        p.add_argument("--eval-every", dest="eval_every", type=int, default=None,
                       help="evaluation cadence in steps (default 25)")
        p.add_argument("--width", type=int, default=None,
                       help="interpolation width (default 37)")
        p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None,
                       help="Adam learning rate (default 0.0004)")
        p.add_argument("--keep-prob", dest="keep_prob", type=float, default=None,
                       help="dropout keep probability (default 0.6)")

    p = sub.add_parser("train", help="train one network and save a checkpoint")
    p.add_argument("--data", required=True, help="JSONL event file")
    p.add_argument("--out", required=True, help="checkpoint output path")
    add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    p.add_argument("--data", required=True, help="JSONL event file")
    p.add_argument("--k", type=int, default=10, help="number of folds (default 10)")
    p.add_argument("--seeds", type=int, default=5, help="initializations per fold (default 5)")
    p.add_argument("--report", required=True, help="report JSON output path")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="parallel fold workers (default: number of processors)")
    add_train_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("classify", help="classify one event JSON file")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--event", required=True, help="file with one event JSON record")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--config", help="network config JSON (keep_prob forced to 1)")
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="max relative error (default 1e-4)")
    p.add_argument("--batch", type=int, default=4, help="check batch size (default 4)")
    p.add_argument("--seed", type=int, default=1,
                   help="seed for the fixed check batch (default 1)")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("histogram", help="accuracy histogram CSV from a cv report")
    p.add_argument("--report", required=True, help="cv report JSON")
    p.add_argument("--out", required=True, help="histogram CSV output path")
    p.add_argument("--bin-width", dest="bin_width", type=float, default=0.01,
                   help="bin width (default 0.01)")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("detect", help="find events in a level stream CSV (timestamp,dba)")
    p.add_argument("--stream", required=True, help="CSV with one row per second")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("serve", help="run the classification/labeling HTTP service")
    p.add_argument("--config", help="service config JSON")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NoiseNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
