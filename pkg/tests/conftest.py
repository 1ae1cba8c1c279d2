import pytest

from noisenet.nn.network import NetworkConfig
from noisenet.training import TrainConfig


@pytest.fixture
def tiny_network_config() -> NetworkConfig:
    return NetworkConfig(input_rows=15, input_cols=15, conv1_filters=2, conv2_filters=3,
                         dense_hidden=8)


@pytest.fixture
def fast_train_config() -> TrainConfig:
    return TrainConfig(batch_size=16, steps=10, seed=3, eval_every=5)
