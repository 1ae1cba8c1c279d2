"""Layer primitives with exact hand-derived backward passes.

Everything operates on float64 numpy arrays. Convolution is
cross-correlation (no kernel flip) with 3x3 kernels, unit stride, and no
padding. Forward functions return whatever intermediate state their
backward needs; nothing here owns parameters.
"""

from __future__ import annotations

import numpy as np

from ..errors import BatchTooSmall, ShapeMismatch

KERNEL = 3


def _windows3(x: np.ndarray) -> np.ndarray:
    """All 3x3 windows of (N, C, H, W) as a strided view (N, C, H-2, W-2, 3, 3)."""
    n, c, h, w = x.shape
    sn, sc, sh, sw = x.strides
    return np.lib.stride_tricks.as_strided(
        x, (n, c, h - 2, w - 2, KERNEL, KERNEL), (sn, sc, sh, sw, sh, sw), writeable=False
    )


def _im2col(x: np.ndarray) -> np.ndarray:
    """(N, C, H, W) -> (N*(H-2)*(W-2), C*9) patch matrix for the 3x3 windows."""
    n, c, h, w = x.shape
    win = _windows3(x)  # (N, C, Ho, Wo, 3, 3)
    return (
        win.transpose(0, 2, 3, 1, 4, 5).reshape(n * (h - 2) * (w - 2), c * KERNEL * KERNEL)
    )


def conv2d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray, with_cols: bool = False):
    """Valid cross-correlation of (N, C, H, W) with (K, C, 3, 3) kernels.

    out[n,k,i,j] = bias[k] + sum_c sum_uv x[n,c,i+u,j+v] * kernels[k,c,u,v]

    With ``with_cols`` the im2col patch matrix is also returned so the
    backward pass can reuse it instead of rebuilding it.
    """
    if x.ndim != 4 or kernels.ndim != 4:
        raise ShapeMismatch(f"conv2d needs 4-d input and kernels, got {x.shape}, {kernels.shape}")
    n, c, h, w = x.shape
    k, ck, kh, kw = kernels.shape
    if (ck, kh, kw) != (c, KERNEL, KERNEL):
        raise ShapeMismatch(f"kernels {kernels.shape} do not match input channels {c}")
    if bias.shape != (k,):
        raise ShapeMismatch(f"bias must have shape ({k},), got {bias.shape}")
    if h < KERNEL or w < KERNEL:
        raise ShapeMismatch(f"spatial dims must be >= {KERNEL}, got {h}x{w}")
    ho, wo = h - 2, w - 2
    cols = _im2col(x)  # (N*Ho*Wo, C*9)
    out = cols @ kernels.reshape(k, c * KERNEL * KERNEL).T  # (N*Ho*Wo, K)
    out += bias
    out = out.reshape(n, ho, wo, k).transpose(0, 3, 1, 2)
    return (out, cols) if with_cols else out


def conv2d_backward(
    dout: np.ndarray,
    cols: np.ndarray,
    x_shape: tuple[int, int, int, int],
    kernels: np.ndarray,
    need_dx: bool = True,
):
    """Gradients for valid 3x3 cross-correlation; dout is (N, K, Ho, Wo).

    ``cols`` is the forward pass's patch matrix. Returns (dx, dkernels,
    dbias); dx is None when ``need_dx`` is False (input layer).
    """
    n, c, h, w = x_shape
    k = kernels.shape[0]
    ho, wo = h - 2, w - 2
    dflat = dout.transpose(0, 2, 3, 1).reshape(n * ho * wo, k)
    dbias = dflat.sum(axis=0)
    dkernels = (dflat.T @ cols).reshape(k, c, KERNEL, KERNEL)
    if not need_dx:
        return None, dkernels, dbias
    # scatter each output cell's contribution back through its window:
    # dx[n,c,i+u,j+v] += dout[n,k,i,j] * kernels[k,c,u,v]. Accumulating
    # channels-last keeps every GEMM result and add contiguous.
    dx_last = np.zeros((n, h, w, c), dtype=dout.dtype)
    for u in range(KERNEL):
        for v in range(KERNEL):
            contrib = dflat @ kernels[:, :, u, v]  # (N*Ho*Wo, C)
            dx_last[:, u : u + ho, v : v + wo, :] += contrib.reshape(n, ho, wo, c)
    return dx_last.transpose(0, 3, 1, 2), dkernels, dbias


def _maxpool2x2_codes(x: np.ndarray):
    """Max over disjoint 2x2 windows plus the winner's in-window position.

    Codes are 0..3 in row-major window order ((0,0),(0,1),(1,0),(1,1));
    ties resolve to the lowest code, i.e. the first occurrence in a
    row-major scan.
    """
    if x.ndim != 4:
        raise ShapeMismatch(f"maxpool needs (N, C, H, W), got {x.shape}")
    n, c, h, w = x.shape
    if h < 2 or w < 2:
        raise ShapeMismatch(f"spatial dims must be >= 2, got {h}x{w}")
    ho, wo = h // 2, w // 2
    a = x[:, :, : 2 * ho : 2, : 2 * wo : 2]
    b = x[:, :, : 2 * ho : 2, 1 : 2 * wo : 2]
    cc = x[:, :, 1 : 2 * ho : 2, : 2 * wo : 2]
    d = x[:, :, 1 : 2 * ho : 2, 1 : 2 * wo : 2]
    out = np.maximum(np.maximum(a, b), np.maximum(cc, d))
    code = np.full(out.shape, 3, dtype=np.int8)
    code[d == out] = 3
    code[cc == out] = 2
    code[b == out] = 1
    code[a == out] = 0
    return out, code


def maxpool2x2(x: np.ndarray):
    """Disjoint 2x2 max pooling; odd trailing rows/columns are dropped.

    Returns (out, argmax) where argmax holds, per output cell, the flat
    index of the winning source cell in its H*W plane (first occurrence
    wins ties, row-major scan order).
    """
    out, code = _maxpool2x2_codes(x)
    n, c, h, w = x.shape
    ho, wo = out.shape[2], out.shape[3]
    rows = 2 * np.arange(ho)[:, None] + (code >> 1)
    cols = 2 * np.arange(wo)[None, :] + (code & 1)
    return out, rows * w + cols


def _maxpool2x2_backward_codes(dout: np.ndarray, code: np.ndarray, x_shape) -> np.ndarray:
    """Scatter gradients to the winning window cells (windows are disjoint)."""
    n, c, h, w = x_shape
    ho, wo = dout.shape[2], dout.shape[3]
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    dx[:, :, : 2 * ho : 2, : 2 * wo : 2] = dout * (code == 0)
    dx[:, :, : 2 * ho : 2, 1 : 2 * wo : 2] = dout * (code == 1)
    dx[:, :, 1 : 2 * ho : 2, : 2 * wo : 2] = dout * (code == 2)
    dx[:, :, 1 : 2 * ho : 2, 1 : 2 * wo : 2] = dout * (code == 3)
    return dx


def maxpool2x2_backward(dout: np.ndarray, argmax: np.ndarray, x_shape) -> np.ndarray:
    """Scatter gradients back to the argmax positions from flat indices."""
    n, c, h, w = x_shape
    dx = np.zeros((n, c, h * w), dtype=np.float64)
    np.put_along_axis(dx, argmax.reshape(n, c, -1), dout.reshape(n, c, -1), axis=-1)
    return dx.reshape(n, c, h, w)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0.0)


def dropout(x: np.ndarray, keep_prob: float, mode: str, rng) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: kept cells are scaled by 1/keep_prob at train time.

    Inference is the identity. Returns (out, kept) where kept is a boolean
    mask, or None when nothing was dropped. ``rng`` may be a seed or a
    numpy Generator.
    """
    if not (0.0 < keep_prob <= 1.0):
        raise ShapeMismatch(f"keep_prob must be in (0, 1], got {keep_prob}")
    if mode == "infer" or keep_prob == 1.0:
        return x, None
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    kept = rng.random(x.shape, dtype=np.float32) < keep_prob
    return apply_dropout_mask(x, kept, keep_prob), kept


def apply_dropout_mask(x: np.ndarray, kept: np.ndarray, keep_prob: float) -> np.ndarray:
    """Multiply by the kept mask and rescale; identical op order forward
    and backward keeps the effective factor bit-identical."""
    out = x * kept
    out *= 1.0 / keep_prob
    return out


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    if x.ndim != 2 or weights.ndim != 2 or x.shape[1] != weights.shape[0]:
        raise ShapeMismatch(f"dense shapes do not conform: {x.shape} x {weights.shape}")
    if bias.shape != (weights.shape[1],):
        raise ShapeMismatch(f"bias must have shape ({weights.shape[1]},), got {bias.shape}")
    return x @ weights + bias


def dense_backward(dout: np.ndarray, x: np.ndarray, weights: np.ndarray):
    dweights = x.T @ dout
    dbias = dout.sum(axis=0)
    dx = dout @ weights.T
    return dx, dweights, dbias


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: str,
    momentum: float = 0.9,
    eps: float = 1e-5,
    update_running: bool = True,
):
    """Batch normalization over (batch, features) or (N, C, H, W).

    Conv activations are normalized per channel over batch and spatial
    positions; dense activations per feature over the batch. Train mode
    uses batch statistics (population variance) and updates the running
    statistics in place as running <- momentum*running + (1-momentum)*batch.
    Infer mode uses the running statistics only.

    Returns (out, cache) where cache replays the batch statistics exactly
    in the backward pass.
    """
    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    nfeat = x.shape[1] if x.ndim == 4 else x.shape[-1]
    if x.ndim not in (2, 4):
        raise ShapeMismatch(f"batchnorm expects 2-d or 4-d input, got {x.shape}")
    if gamma.shape != (nfeat,) or beta.shape != (nfeat,):
        raise ShapeMismatch(f"gamma/beta must have shape ({nfeat},)")

    def _expand(v):
        return v.reshape((1, nfeat) + (1,) * (x.ndim - 2)) if x.ndim == 4 else v

    if mode == "infer":
        inv = 1.0 / np.sqrt(running_var + eps)
        xhat = (x - _expand(running_mean)) * _expand(inv)
        return _expand(gamma) * xhat + _expand(beta), None

    if x.shape[0] < 2:
        raise BatchTooSmall(f"train-mode batchnorm needs batch >= 2, got {x.shape[0]}")
    m = x.size // nfeat
    if x.ndim == 4:
        # contiguous reductions; the naive axis=(0,2,3) path is slow
        xr = x.reshape(x.shape[0], nfeat, -1)
        mean = xr.sum(axis=2).sum(axis=0) / m
        sq = np.einsum("ncp,ncp->nc", xr, xr).sum(axis=0)
        var = np.maximum(sq / m - mean * mean, 0.0)  # population variance
    else:
        mean = x.mean(axis=0)
        var = x.var(axis=0)  # population variance
    inv = 1.0 / np.sqrt(var + eps)
    xhat = x - _expand(mean)
    xhat *= _expand(inv)
    out = xhat * _expand(gamma)
    out += _expand(beta)
    if update_running:
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mean
        running_var *= momentum
        running_var += (1.0 - momentum) * var
    cache = (xhat, inv, gamma, axes, m)
    return out, cache


def batchnorm_backward(dout: np.ndarray, cache):
    """Exact gradients through train-mode batch statistics.

    With dxhat = dout*gamma, dx = inv*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat));
    the per-feature means reduce to gamma*dbeta/m and gamma*dgamma/m, so
    dxhat itself is never materialized.
    """
    xhat, inv, gamma, axes, m = cache

    def _expand(v):
        return v.reshape((1,) + (len(v),) + (1,) * (dout.ndim - 2)) if dout.ndim == 4 else v

    if dout.ndim == 4:
        n, c = dout.shape[:2]
        dr = dout.reshape(n, c, -1)
        dbeta = dr.sum(axis=2).sum(axis=0)
        dgamma = np.einsum("ncp,ncp->nc", dr, xhat.reshape(n, c, -1)).sum(axis=0)
    else:
        dbeta = dout.sum(axis=0)
        dgamma = (dout * xhat).sum(axis=0)

    dx = dout - _expand(dbeta / m)
    dx -= xhat * _expand(dgamma / m)
    dx *= _expand(gamma * inv)
    return dx, dgamma, dbeta


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax computed with max subtraction for stability."""
    if logits.ndim != 2:
        raise ShapeMismatch(f"softmax expects (batch, classes), got {logits.shape}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-probability of the true class, floored at 1e-15."""
    p = np.maximum(probs[np.arange(len(labels)), labels], 1e-15)
    return float(-np.log(p).mean())


def softmax_cross_entropy_backward(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(mean CE)/dlogits = (probs - onehot) / batch."""
    d = probs.copy()
    d[np.arange(len(labels)), labels] -= 1.0
    return d / len(labels)
