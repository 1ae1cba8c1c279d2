"""Training the network on synthetic events and watching it converge.

Uses a small bootstrap batch and step count so the demo finishes in
about a minute on a laptop; the full protocol uses batch 2000 for 300
steps.

Run:  python demos/04_training.py
"""

import time

from noisenet.ingest import Dataset
from noisenet.synthetic import generate_synthetic_dataset
from noisenet.training import TrainConfig, evaluate, train

dataset = generate_synthetic_dataset(100, seed=5, difficulty=0.25)
train_set = Dataset.from_events(dataset.events[:160])
val_set = Dataset.from_events(dataset.events[160:])
print(f"{len(train_set)} training events, {len(val_set)} validation events")

config = TrainConfig(batch_size=128, steps=100, seed=0, eval_every=10)
started = time.time()
net, history = train(train_set, val_set, config)
print(f"\n{'step':>5} {'train loss':>11} {'val accuracy':>13}")
for point in history:
    print(f"{point.step:>5} {point.train_loss:>11.4f} {point.val_accuracy:>13.4f}")

accuracy, confusion = evaluate(net, val_set)
print(f"\nfinal validation accuracy {accuracy:.4f} in {time.time() - started:.0f}s")
print(f"confusion matrix (rows true, cols predicted): {confusion.tolist()}")
