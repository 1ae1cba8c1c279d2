"""The uncertainty-sampling loop: triage, label, retrain.

A model trained on the base mix meets a drifted population of community
events (sustained mid-band hums it has never seen). Events whose softmax
entropy exceeds the threshold go to the labeling queue; after a human
labels them, a forced retrain folds them into the training set and
accuracy on the drifted population recovers.

Run:  python demos/06_active_learning.py     (~4 minutes)
"""

import math
import time

import numpy as np

from noisenet.active_learning import (
    LabelingQueue,
    TriagePolicy,
    prediction_entropy,
    retrain,
    triage,
)
from noisenet.events import Prediction
from noisenet.ingest import Dataset
from noisenet.nn.network import INFER, forward_arrays
from noisenet.preprocess import make_event_matrix
from noisenet.synthetic import generate_community_variant, generate_synthetic_dataset
from noisenet.training import TrainConfig, evaluate, train

started = time.time()
base = generate_synthetic_dataset(150, seed=101, difficulty=0.25)
config = TrainConfig(batch_size=256, steps=150, seed=7, eval_every=150)
print("training the base model...")
net, _ = train(base, Dataset.from_events([]), config)

stream = generate_community_variant(200, seed=55, difficulty=0.6)
holdout = generate_community_variant(200, seed=56, difficulty=0.6)

policy = TriagePolicy(entropy_threshold=0.45, retrain_min_new_labels=1)
queue = LabelingQueue(policy)
events_by_id = {}
for event in stream.events:
    matrix = make_event_matrix(event, net.duration_stats, net.config.input_cols)
    probs = forward_arrays(net, matrix.values[None, None, :, :],
                           np.array([matrix.duration_feature]), INFER)[0]
    prediction = Prediction(
        probabilities=(float(probs[0]), float(probs[1])),
        entropy=min(prediction_entropy(probs), math.log(2.0)),
        model_version=net.version,
        triage="auto_classified",
    )
    if triage(prediction, policy) == "queued_for_labeling":
        queue.enqueue(event.event_id, prediction)
        events_by_id[event.event_id] = event

print(f"streamed 200 drifted events: {queue.pending_count()} queued at "
      f"entropy threshold {policy.entropy_threshold}")

accuracy_before, _ = evaluate(net, holdout)
print(f"hold-out accuracy on the drifted population before retraining: "
      f"{accuracy_before:.3f}")

print("an analyst labels everything in the queue (all are community)...")
for entry in queue.pending():
    queue.submit_label(entry.event_id, "community", "analyst")

print("retraining on base + newly labeled events...")
new_net, combined, _ = retrain(queue, events_by_id, base, config, "v2", force=True)
accuracy_after, _ = evaluate(new_net, holdout)
print(f"trained {new_net.version} on {len(combined)} events")
print(f"hold-out accuracy after retraining: {accuracy_after:.3f} "
      f"({(accuracy_after - accuracy_before) * 100:+.1f} percentage points, "
      f"{time.time() - started:.0f}s total)")
