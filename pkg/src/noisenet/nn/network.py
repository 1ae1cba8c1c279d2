"""The two-conv/two-dense classification network and its exact backward pass.

Layer chain (default config):

    1x37x37 -> conv1 -> 8x35x35 -> pool -> 8x17x17
            -> conv2 -> 16x15x15 -> pool -> 16x7x7
            -> flatten (784) + duration (1) -> dense 64 -> 2 -> softmax

Batch normalization and ReLU follow each convolution and the hidden dense
layer, with dropout after each ReLU; the output layer feeds softmax
directly. Running batchnorm statistics make inference deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ShapeMismatch, StateMismatch
from ..events import EventMatrix
from ..preprocess import DurationStats
from .layers import (
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    dropout,
    apply_dropout_mask,
    _maxpool2x2_backward_codes,
    _maxpool2x2_codes,
    relu,
    softmax,
    softmax_cross_entropy_backward,
)

TRAIN = "train"
INFER = "infer"


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture and optimizer hyperparameters.

    A zero learning rate is accepted so tests can exercise null training;
    real training uses a positive rate.
    """

    input_rows: int = 37
    input_cols: int = 37
    conv1_filters: int = 8
    conv2_filters: int = 16
    dense_hidden: int = 64
    classes: int = 2
    keep_prob: float = 0.6
    learning_rate: float = 0.0004
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batchnorm_momentum: float = 0.9
    batchnorm_epsilon: float = 1e-5

    def __post_init__(self) -> None:
        if not (0.0 < self.keep_prob <= 1.0):
            raise ShapeMismatch(f"keep_prob must be in (0, 1], got {self.keep_prob}")
        if self.learning_rate < 0.0:
            raise ShapeMismatch(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.conv1_filters < 1 or self.conv2_filters < 1:
            raise ShapeMismatch("filter counts must be >= 1")
        if self.input_rows < 11 or self.input_cols < 11:
            raise ShapeMismatch("input must be at least 11x11 to survive two conv/pool stages")

    @property
    def shape_chain(self) -> tuple[tuple[int, ...], ...]:
        """Activation shapes (channels, height, width) through the stack."""
        r1, c1 = self.input_rows - 2, self.input_cols - 2
        r1p, c1p = r1 // 2, c1 // 2
        r2, c2 = r1p - 2, c1p - 2
        r2p, c2p = r2 // 2, c2 // 2
        return (
            (1, self.input_rows, self.input_cols),
            (self.conv1_filters, r1, c1),
            (self.conv1_filters, r1p, c1p),
            (self.conv2_filters, r2, c2),
            (self.conv2_filters, r2p, c2p),
            (self.conv2_filters * r2p * c2p + 1,),
            (self.dense_hidden,),
            (self.classes,),
        )

    @property
    def flat_features(self) -> int:
        return self.shape_chain[5][0]


# Trainable parameters in checkpoint/optimizer order.
PARAM_NAMES = (
    "conv1_k", "conv1_b", "bn1_gamma", "bn1_beta",
    "conv2_k", "conv2_b", "bn2_gamma", "bn2_beta",
    "dense1_w", "dense1_b", "bn3_gamma", "bn3_beta",
    "out_w", "out_b",
)
# Non-trained state carried by the network (batchnorm running statistics).
STAT_NAMES = (
    "bn1_mean", "bn1_var", "bn2_mean", "bn2_var", "bn3_mean", "bn3_var",
)


@dataclass
class Network:
    """Parameter set plus duration statistics and a version string.

    ``params`` maps PARAM_NAMES to float64 arrays; ``stats`` maps
    STAT_NAMES to running batchnorm statistics. Mutable during training;
    treat as immutable in infer mode.
    """

    config: NetworkConfig
    params: dict[str, np.ndarray]
    stats: dict[str, np.ndarray]
    duration_stats: DurationStats | None = None
    version: str = "v1"
    mode: str = INFER
    _cache: dict | None = field(default=None, repr=False)

    def param_list(self) -> list[tuple[str, np.ndarray]]:
        return [(name, self.params[name]) for name in PARAM_NAMES]

    def copy(self) -> "Network":
        return Network(
            config=self.config,
            params={k: v.copy() for k, v in self.params.items()},
            stats={k: v.copy() for k, v in self.stats.items()},
            duration_stats=self.duration_stats,
            version=self.version,
            mode=self.mode,
        )

    def with_keep_prob(self, keep_prob: float) -> "Network":
        net = self.copy()
        net.config = replace(net.config, keep_prob=keep_prob)
        return net


def param_shapes(config: NetworkConfig) -> dict[str, tuple[int, ...]]:
    f1, f2 = config.conv1_filters, config.conv2_filters
    hidden, classes = config.dense_hidden, config.classes
    flat = config.flat_features
    return {
        "conv1_k": (f1, 1, 3, 3), "conv1_b": (f1,),
        "bn1_gamma": (f1,), "bn1_beta": (f1,),
        "conv2_k": (f2, f1, 3, 3), "conv2_b": (f2,),
        "bn2_gamma": (f2,), "bn2_beta": (f2,),
        "dense1_w": (flat, hidden), "dense1_b": (hidden,),
        "bn3_gamma": (hidden,), "bn3_beta": (hidden,),
        "out_w": (hidden, classes), "out_b": (classes,),
    }


def init_network(
    config: NetworkConfig,
    seed: int,
    duration_stats: DurationStats | None = None,
    version: str = "v1",
) -> Network:
    """He-style initialization: N(0, 2/fan_in) weights, zero biases, unit gammas."""
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    shapes = param_shapes(config)
    params: dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        if name.endswith("_k"):
            fan_in = int(np.prod(shape[1:]))
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith("_w"):
            fan_in = shape[0]
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith("_gamma"):
            params[name] = np.ones(shape)
        else:
            params[name] = np.zeros(shape)
    stats = {
        "bn1_mean": np.zeros(config.conv1_filters), "bn1_var": np.ones(config.conv1_filters),
        "bn2_mean": np.zeros(config.conv2_filters), "bn2_var": np.ones(config.conv2_filters),
        "bn3_mean": np.zeros(config.dense_hidden), "bn3_var": np.ones(config.dense_hidden),
    }
    return Network(
        config=config,
        params=params,
        stats=stats,
        duration_stats=duration_stats,
        version=version,
        mode=INFER,
    )


def batch_arrays(matrices) -> tuple[np.ndarray, np.ndarray]:
    """Stack EventMatrix objects into (N, 1, R, C) values and (N,) durations."""
    x = np.stack([m.values for m in matrices]).astype(np.float64)[:, None, :, :]
    durations = np.array([m.duration_feature for m in matrices], dtype=np.float64)
    return x, durations


def forward_arrays(
    net: Network,
    x: np.ndarray,
    durations: np.ndarray,
    mode: str,
    dropout_rng=None,
    update_running: bool = True,
    keep_cache: bool = False,
) -> np.ndarray:
    """Run the network on a prepared batch; optionally cache for backward.

    Train mode draws dropout masks from ``dropout_rng`` and (unless
    ``update_running`` is False, as in gradient checking) updates the
    batchnorm running statistics. Infer mode is deterministic.
    """
    cfg = net.config
    p = net.params
    n = x.shape[0]
    if x.shape != (n, 1, cfg.input_rows, cfg.input_cols):
        raise ShapeMismatch(
            f"batch must be (N, 1, {cfg.input_rows}, {cfg.input_cols}), got {x.shape}"
        )
    if durations.shape != (n,):
        raise ShapeMismatch(f"durations must be ({n},), got {durations.shape}")
    train = mode == TRAIN
    if train and dropout_rng is not None and not isinstance(dropout_rng, np.random.Generator):
        dropout_rng = np.random.default_rng(dropout_rng)
    keep = cfg.keep_prob
    bn_kw = dict(momentum=cfg.batchnorm_momentum, eps=cfg.batchnorm_epsilon,
                 update_running=update_running)

    z1, cols1 = conv2d_forward(x, p["conv1_k"], p["conv1_b"], with_cols=True)
    b1, bn1_cache = batchnorm_forward(
        z1, p["bn1_gamma"], p["bn1_beta"], net.stats["bn1_mean"], net.stats["bn1_var"],
        mode, **bn_kw)
    relu1 = b1 > 0.0
    a1 = relu(b1)
    d1, mask1 = dropout(a1, keep, mode, dropout_rng)
    p1, arg1 = _maxpool2x2_codes(d1)

    z2, cols2 = conv2d_forward(p1, p["conv2_k"], p["conv2_b"], with_cols=True)
    b2, bn2_cache = batchnorm_forward(
        z2, p["bn2_gamma"], p["bn2_beta"], net.stats["bn2_mean"], net.stats["bn2_var"],
        mode, **bn_kw)
    relu2 = b2 > 0.0
    a2 = relu(b2)
    d2, mask2 = dropout(a2, keep, mode, dropout_rng)
    p2, arg2 = _maxpool2x2_codes(d2)

    flat = p2.reshape(n, -1)
    feats = np.concatenate([flat, durations[:, None]], axis=1)
    z3 = dense_forward(feats, p["dense1_w"], p["dense1_b"])
    b3, bn3_cache = batchnorm_forward(
        z3, p["bn3_gamma"], p["bn3_beta"], net.stats["bn3_mean"], net.stats["bn3_var"],
        mode, **bn_kw)
    relu3 = b3 > 0.0
    a3 = relu(b3)
    d3, mask3 = dropout(a3, keep, mode, dropout_rng)
    logits = dense_forward(d3, p["out_w"], p["out_b"])
    probs = softmax(logits)

    if keep_cache:
        net._cache = {
            "x_shape": x.shape, "p1_shape": p1.shape, "cols1": cols1, "cols2": cols2,
            "bn1": bn1_cache, "relu1": relu1, "mask1": mask1, "arg1": arg1,
            "d1_shape": d1.shape, "d2_shape": d2.shape,
            "bn2": bn2_cache, "relu2": relu2, "mask2": mask2, "arg2": arg2,
            "feats": feats, "bn3": bn3_cache, "relu3": relu3, "mask3": mask3,
            "d3": d3, "probs": probs, "n": n,
            "shapes": (z1.shape, p1.shape, z2.shape, p2.shape, feats.shape,
                       z3.shape, logits.shape),
        }
    return probs


def forward(net: Network, matrices, mode: str, dropout_rng=None) -> np.ndarray:
    """Classify a batch of EventMatrix objects; rows sum to one."""
    x, durations = batch_arrays(matrices)
    return forward_arrays(net, x, durations, mode, dropout_rng=dropout_rng)


def backward(net: Network, labels: np.ndarray) -> dict[str, np.ndarray]:
    """Exact loss gradients for every trainable parameter.

    Requires a cached train-mode forward pass on the same network; dropout
    masks, pooling argmaxes, and batch statistics are replayed from it.
    """
    cache = net._cache
    if cache is None:
        raise StateMismatch("backward called without a cached forward pass")
    labels = np.asarray(labels)
    if labels.shape != (cache["n"],):
        raise ShapeMismatch(f"labels must be ({cache['n']},), got {labels.shape}")
    p = net.params
    keep = net.config.keep_prob
    grads: dict[str, np.ndarray] = {}

    dlogits = softmax_cross_entropy_backward(cache["probs"], labels)
    dd3, grads["out_w"], grads["out_b"] = dense_backward(dlogits, cache["d3"], p["out_w"])
    if cache["mask3"] is not None:
        dd3 = apply_dropout_mask(dd3, cache["mask3"], keep)
    da3 = dd3 * cache["relu3"]
    dz3, grads["bn3_gamma"], grads["bn3_beta"] = batchnorm_backward(da3, cache["bn3"])
    dfeats, grads["dense1_w"], grads["dense1_b"] = dense_backward(
        dz3, cache["feats"], p["dense1_w"])

    n = cache["n"]
    dp2 = dfeats[:, :-1].reshape((n,) + cache["shapes"][3][1:])
    dd2 = _maxpool2x2_backward_codes(dp2, cache["arg2"], cache["d2_shape"])
    if cache["mask2"] is not None:
        dd2 = apply_dropout_mask(dd2, cache["mask2"], keep)
    da2 = dd2 * cache["relu2"]
    dz2, grads["bn2_gamma"], grads["bn2_beta"] = batchnorm_backward(da2, cache["bn2"])
    dp1, grads["conv2_k"], grads["conv2_b"] = conv2d_backward(
        dz2, cache["cols2"], cache["p1_shape"], p["conv2_k"])

    dd1 = _maxpool2x2_backward_codes(dp1, cache["arg1"], cache["d1_shape"])
    if cache["mask1"] is not None:
        dd1 = apply_dropout_mask(dd1, cache["mask1"], keep)
    da1 = dd1 * cache["relu1"]
    dz1, grads["bn1_gamma"], grads["bn1_beta"] = batchnorm_backward(da1, cache["bn1"])
    _, grads["conv1_k"], grads["conv1_b"] = conv2d_backward(
        dz1, cache["cols1"], cache["x_shape"], p["conv1_k"], need_dx=False)
    return grads


def training_loss(net: Network, x: np.ndarray, durations: np.ndarray, labels: np.ndarray,
                  dropout_rng=None, keep_cache: bool = False) -> float:
    """Train-mode loss without touching the running statistics."""
    probs = forward_arrays(net, x, durations, TRAIN, dropout_rng=dropout_rng,
                           update_running=False, keep_cache=keep_cache)
    return cross_entropy(probs, labels)
