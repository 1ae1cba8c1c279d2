"""Driving the HTTP service end to end, in process.

Trains a small model, mounts the service on a test client, ingests
events, inspects the queue, labels the most uncertain event, and walks
the model lifecycle (retrain, activate).

Run:  python demos/07_service.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from noisenet.ingest import Dataset, save_dataset, serialize_event
from noisenet.nn.checkpoint import save_checkpoint
from noisenet.service.app import create_app
from noisenet.service.config import ServiceConfig
from noisenet.synthetic import generate_synthetic_dataset
from noisenet.training import TrainConfig, train

workdir = Path(tempfile.mkdtemp(prefix="noisenet-demo-"))
print(f"working directory: {workdir}")

print("training a small initial model...")
base = generate_synthetic_dataset(40, seed=1, difficulty=0.25)
config = TrainConfig(batch_size=64, steps=40, seed=2, eval_every=20)
net, _ = train(base, Dataset.from_events([]), config)
checkpoint = workdir / "initial.bin"
save_checkpoint(net, None, checkpoint)
base_path = workdir / "base.jsonl"
save_dataset(base, base_path)

service_config = ServiceConfig(
    data_dir=str(workdir / "data"),
    entropy_threshold=0.2,
    retrain_min_new_labels=3,
    initial_model=str(checkpoint),
    base_dataset=str(base_path),
    retrain=TrainConfig(batch_size=64, steps=30, seed=9, eval_every=30),
)
client = TestClient(create_app(service_config))

print("\ningesting 12 fresh events...")
stream = generate_synthetic_dataset(6, seed=33, difficulty=0.6)
for event in stream.events:
    record = json.loads(serialize_event(event))
    record["label"] = None  # the service should not see ground truth
    response = client.post("/v1/events", content=json.dumps(record))
    body = response.json()
    print(f"  {body['event_id']}: p(aircraft)={body['prediction']['probabilities'][0]:.3f} "
          f"entropy={body['prediction']['entropy']:.3f} -> {body['triage']}")

queue = client.get("/v1/queue?limit=5").json()
print(f"\nqueue: {queue['pending_count']} pending, most uncertain first")
for entry in queue["entries"]:
    print(f"  {entry['event_id']}: entropy {entry['entropy']:.3f}")

if queue["entries"]:
    top = queue["entries"][0]["event_id"]
    matrix = client.get(f"/v1/events/{top}/matrix").json()
    print(f"\nmatrix endpoint for {top}: {len(matrix['matrix'])} rows x "
          f"{matrix['width']} cols, duration {matrix['duration_seconds']}s")
    labeled = client.post(f"/v1/queue/{top}/label",
                          json={"class": "community", "labeler": "demo"}).json()
    print(f"labeled {top} as {labeled['class']} by {labeled['labeler']}")

retrain_response = client.post("/v1/models/retrain", json={"force": True})
print(f"\nforced retrain -> {retrain_response.status_code}: {retrain_response.json()}")
version = retrain_response.json()["version"]
client.post(f"/v1/models/{version}/activate")
print(f"activated {version}; registry: "
      f"{json.dumps(client.get('/v1/models').json(), indent=2)}")
print(f"health: {client.get('/v1/health').json()}")
