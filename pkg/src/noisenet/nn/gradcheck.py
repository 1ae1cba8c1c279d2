"""Central finite-difference verification of the analytic gradients.

The loss surface must be deterministic for the comparison to mean
anything, so dropout has to be disabled (keep_prob=1) and the batch held
fixed; batch statistics are recomputed per perturbed forward, which the
analytic backward accounts for exactly.

Central differences are only meaningful where the loss is smooth over
the +-h interval. If a ReLU sign or pooling argmax flips within h of the
evaluation point, the check reports a large error for that coordinate by
construction; use a batch that sits away from those kinks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .network import PARAM_NAMES, TRAIN, Network, backward, forward_arrays, training_loss

REL_ERR_FLOOR = 1e-8


def _loss_wide(net: Network, x, durations, labels):
    """Train-mode cross-entropy without narrowing the dtype to float64."""
    probs = forward_arrays(net, x, durations, TRAIN, update_running=False)
    p = np.maximum(probs[np.arange(len(labels)), labels], np.longdouble(1e-15))
    return -np.log(p).mean()


@dataclass(frozen=True)
class LayerCheck:
    name: str
    coords_checked: int
    max_rel_err: float
    passed: bool


@dataclass(frozen=True)
class GradCheckReport:
    layers: tuple[LayerCheck, ...]
    tolerance: float
    h: float

    @property
    def max_rel_err(self) -> float:
        return max(layer.max_rel_err for layer in self.layers)

    @property
    def passed(self) -> bool:
        return all(layer.passed for layer in self.layers)

    def summary(self) -> str:
        lines = [f"gradient check: h={self.h:g} tolerance={self.tolerance:g}"]
        for layer in self.layers:
            status = "ok" if layer.passed else "FAIL"
            lines.append(
                f"  {layer.name:<10} coords={layer.coords_checked:>4} "
                f"max_rel_err={layer.max_rel_err:.3e} {status}"
            )
        return "\n".join(lines)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), REL_ERR_FLOOR)


def gradient_check(
    net: Network,
    x: np.ndarray,
    durations: np.ndarray,
    labels: np.ndarray,
    tolerance: float = 1e-4,
    h: float = 1e-5,
    max_coords_per_layer: int = 200,
    seed: int = 0,
) -> GradCheckReport:
    """Compare backward() to central differences on every parameter.

    Large parameter arrays are subsampled to ``max_coords_per_layer``
    seeded coordinates. Returns a per-layer report of max relative error
    |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).

    The perturbed losses are evaluated in extended precision: several
    gradients here are structurally zero (a shift that is uniform across
    the batch is removed exactly by the next batchnorm layer), and at
    h=1e-5 double-precision rounding noise in the loss would otherwise
    swamp them.
    """
    if net.config.keep_prob != 1.0:
        raise ShapeMismatch("gradient check requires dropout disabled (keep_prob=1)")
    rng = np.random.default_rng(seed)

    training_loss(net, x, durations, labels, keep_cache=True)
    analytic = backward(net, labels)

    wide = net.copy()
    wide.params = {k: v.astype(np.longdouble) for k, v in wide.params.items()}
    wide.stats = {k: v.astype(np.longdouble) for k, v in wide.stats.items()}
    x_wide = x.astype(np.longdouble)
    dur_wide = durations.astype(np.longdouble)
    h_wide = np.longdouble(h)

    layers = []
    for name in PARAM_NAMES:
        theta = wide.params[name]
        size = theta.size
        if size <= max_coords_per_layer:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_coords_per_layer, replace=False)
        flat = theta.reshape(-1)
        ga = analytic[name].reshape(-1)
        worst = 0.0
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + h_wide
            loss_plus = _loss_wide(wide, x_wide, dur_wide, labels)
            flat[idx] = original - h_wide
            loss_minus = _loss_wide(wide, x_wide, dur_wide, labels)
            flat[idx] = original
            numeric = float((loss_plus - loss_minus) / (2.0 * h_wide))
            worst = max(worst, relative_error(float(ga[idx]), numeric))
        layers.append(
            LayerCheck(
                name=name,
                coords_checked=len(coords),
                max_rel_err=worst,
                passed=worst < tolerance,
            )
        )
    return GradCheckReport(layers=tuple(layers), tolerance=tolerance, h=h)
