"""Orchestrate the console round-trip acceptance check.

Trains a small model, starts the real HTTP service with an entropy
threshold low enough that everything queues, seeds exactly 5 unlabeled
events, then runs the console's integration test (vitest) against the
live server. Exits nonzero if any step fails.

Run from the frontend directory:  python scripts/roundtrip.py
"""

import json
import os
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path
from tempfile import mkdtemp

import httpx

FRONTEND = Path(__file__).resolve().parent.parent


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def main() -> int:
    from noisenet.ingest import Dataset, save_dataset, serialize_event
    from noisenet.nn.checkpoint import save_checkpoint
    from noisenet.nn.network import NetworkConfig
    from noisenet.synthetic import generate_synthetic_dataset
    from noisenet.training import TrainConfig, train

    workdir = Path(mkdtemp(prefix="console-roundtrip-"))
    print(f"[roundtrip] workdir {workdir}")

    tiny_network = {"input_rows": 37, "input_cols": 15, "conv1_filters": 2,
                    "conv2_filters": 3, "dense_hidden": 8}
    train_config = TrainConfig(batch_size=32, steps=15, seed=3, eval_every=15,
                               width=15, network=NetworkConfig(**tiny_network))
    base = generate_synthetic_dataset(12, seed=21, difficulty=0.25)
    net, _ = train(base, Dataset.from_events([]), train_config)
    checkpoint = workdir / "initial.bin"
    save_checkpoint(net, None, checkpoint)
    base_path = workdir / "base.jsonl"
    save_dataset(base, base_path)

    port = free_port()
    data_dir = workdir / "data"
    config_path = workdir / "service.json"
    config_path.write_text(json.dumps({
        "data_dir": str(data_dir),
        "listen_addr": f"127.0.0.1:{port}",
        "entropy_threshold": 1e-9,
        "retrain_min_new_labels": 5,
        "initial_model": str(checkpoint),
        "base_dataset": str(base_path),
        "retrain": {"batch_size": 16, "steps": 4, "seed": 1, "eval_every": 4,
                    "width": 15, "network": tiny_network},
    }))

    server = subprocess.Popen(
        [sys.executable, "-m", "noisenet", "serve", "--config", str(config_path)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base_url = f"http://127.0.0.1:{port}"
    try:
        with httpx.Client(timeout=10.0) as client:
            for _ in range(100):
                try:
                    if client.get(f"{base_url}/v1/health").status_code == 200:
                        break
                except httpx.TransportError:
                    time.sleep(0.15)
            else:
                print("[roundtrip] service did not come up")
                return 1

            seeded = 0
            attempt = 0
            while seeded < 5 and attempt < 50:
                attempt += 1
                event = generate_synthetic_dataset(
                    1, seed=1000 + attempt, difficulty=0.6
                ).events[0]
                record = json.loads(serialize_event(event))
                record["label"] = None
                record["event_id"] = f"roundtrip-{attempt}"
                response = client.post(f"{base_url}/v1/events", content=json.dumps(record))
                body = response.json()
                if response.status_code == 200 and body["triage"] == "queued_for_labeling":
                    seeded += 1
            if seeded != 5:
                print(f"[roundtrip] could not seed 5 queued events (got {seeded})")
                return 1
            queue = client.get(f"{base_url}/v1/queue?limit=10").json()
            print(f"[roundtrip] queue seeded: {queue['pending_count']} pending")

        env = {
            **os.environ,
            "CONSOLE_API_URL": base_url,
            "NOISENET_LABELS_PATH": str(data_dir / "queue" / "labels.jsonl"),
        }
        result = subprocess.run(
            ["npx", "vitest", "run", "--config", "vitest.integration.config.ts"],
            cwd=FRONTEND,
            env=env,
        )
        return result.returncode
    finally:
        server.send_signal(signal.SIGTERM)
        try:
            server.wait(timeout=10)
        except subprocess.TimeoutExpired:
            server.kill()


if __name__ == "__main__":
    sys.exit(main())
