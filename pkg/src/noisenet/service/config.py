"""Service configuration: JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..nn.network import NetworkConfig
from ..training import TrainConfig

ENV_PREFIX = "NOISENET_"


@dataclass
class ServiceConfig:
    data_dir: str = "data"
    listen_addr: str = "127.0.0.1:8080"
    entropy_threshold: float = 0.45
    retrain_min_new_labels: int = 50
    queue_capacity: int = 10_000
    base_dataset: str | None = None
    initial_model: str | None = None
    console_dir: str | None = None
    retrain: TrainConfig = field(
        default_factory=lambda: TrainConfig(batch_size=256, steps=150, seed=0)
    )

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["retrain"] = {
            "batch_size": self.retrain.batch_size,
            "steps": self.retrain.steps,
            "seed": self.retrain.seed,
            "eval_every": self.retrain.eval_every,
            "width": self.retrain.width,
        }
        return d


def _train_config_from_dict(raw: dict) -> TrainConfig:
    network = NetworkConfig(**raw.pop("network", {}))
    return TrainConfig(network=network, **raw)


def load_service_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Read the JSON config (if any) and apply NOISENET_* env overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    retrain_raw = raw.pop("retrain", None)
    config = ServiceConfig(**raw)
    if retrain_raw is not None:
        config.retrain = _train_config_from_dict(dict(retrain_raw))

    if env.get(ENV_PREFIX + "DATA_DIR"):
        config.data_dir = env[ENV_PREFIX + "DATA_DIR"]
    if env.get(ENV_PREFIX + "LISTEN_ADDR"):
        config.listen_addr = env[ENV_PREFIX + "LISTEN_ADDR"]
    if env.get(ENV_PREFIX + "ENTROPY_THRESHOLD"):
        config.entropy_threshold = float(env[ENV_PREFIX + "ENTROPY_THRESHOLD"])
    if env.get(ENV_PREFIX + "RETRAIN_MIN_NEW_LABELS"):
        config.retrain_min_new_labels = int(env[ENV_PREFIX + "RETRAIN_MIN_NEW_LABELS"])
    return config
