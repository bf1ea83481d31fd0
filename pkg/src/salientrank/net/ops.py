"""Primitive differentiable array operations for the toy network.

All tensors are (channels, height, width) or flat feature vectors.
Every forward function returns (output, cache); the matching backward
function consumes the cache and returns exact analytic gradients.
Convolutions are zero-padded SAME cross-correlations built on im2col.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


def _same_padding(k: int, dilation: int) -> int:
    if k % 2 != 1:
        raise ValidationError(f"SAME padding requires odd kernels, got {k}")
    return dilation * (k - 1) // 2


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, dilation: int,
            out_h: int, out_w: int) -> np.ndarray:
    c = xp.shape[0]
    cols = np.empty((c, kh, kw, out_h, out_w), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            hs = i * dilation
            ws = j * dilation
            cols[:, i, j] = xp[:, hs : hs + stride * out_h : stride,
                               ws : ws + stride * out_w : stride]
    return cols


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray,
           stride: int = 1, dilation: int = 1):
    """SAME-padded convolution: (C_in, H, W) -> (C_out, ceil(H/s), ceil(W/s))."""
    c_out, c_in, kh, kw = w.shape
    if x.ndim != 3 or x.shape[0] != c_in:
        raise ValidationError(
            f"conv input must be ({c_in}, H, W), got shape {x.shape}"
        )
    ph = _same_padding(kh, dilation)
    pw = _same_padding(kw, dilation)
    h, wd = x.shape[1], x.shape[2]
    out_h = (h + 2 * ph - dilation * (kh - 1) - 1) // stride + 1
    out_w = (wd + 2 * pw - dilation * (kw - 1) - 1) // stride + 1
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw)))
    cols = _im2col(xp, kh, kw, stride, dilation, out_h, out_w)
    y = w.reshape(c_out, -1) @ cols.reshape(c_in * kh * kw, -1)
    y = y.reshape(c_out, out_h, out_w) + b[:, None, None]
    cache = (x.shape, cols, w, stride, dilation, ph, pw)
    return y, cache


def conv2d_backward(dy: np.ndarray, cache):
    """Gradients of conv2d w.r.t. input, weights and bias."""
    x_shape, cols, w, stride, dilation, ph, pw = cache
    c_out, c_in, kh, kw = w.shape
    out_h, out_w = dy.shape[1], dy.shape[2]
    dy_flat = dy.reshape(c_out, -1)

    dw = (dy_flat @ cols.reshape(c_in * kh * kw, -1).T).reshape(w.shape)
    db = dy.sum(axis=(1, 2))

    dcols = (w.reshape(c_out, -1).T @ dy_flat).reshape(c_in, kh, kw, out_h, out_w)
    dxp = np.zeros((c_in, x_shape[1] + 2 * ph, x_shape[2] + 2 * pw), dtype=dy.dtype)
    for i in range(kh):
        for j in range(kw):
            hs = i * dilation
            ws = j * dilation
            dxp[:, hs : hs + stride * out_h : stride,
                ws : ws + stride * out_w : stride] += dcols[:, i, j]
    dx = dxp[:, ph : ph + x_shape[1], pw : pw + x_shape[2]]
    return dx, dw, db


def relu(x: np.ndarray):
    mask = x > 0
    return np.where(mask, x, 0.0).astype(x.dtype, copy=False), mask


def relu_backward(dy: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, dy, 0.0).astype(dy.dtype, copy=False)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * y * (1.0 - y)


def _upsample_matrix(length: int, dtype) -> np.ndarray:
    """Linear operator doubling a 1-D axis (bilinear, half-pixel centres)."""
    out = 2 * length
    src = (np.arange(out, dtype=np.float64) + 0.5) / 2.0 - 0.5
    i0 = np.floor(src).astype(int)
    t = src - i0
    lo = np.clip(i0, 0, length - 1)
    hi = np.clip(i0 + 1, 0, length - 1)
    u = np.zeros((out, length), dtype=dtype)
    rows = np.arange(out)
    u[rows, lo] += (1.0 - t).astype(dtype)
    u[rows, hi] += t.astype(dtype)
    return u


def upsample2x(x: np.ndarray):
    """Bilinear x2 upsampling of a (C, H, W) tensor."""
    if x.ndim != 3:
        raise ValidationError(f"upsample expects (C, H, W), got shape {x.shape}")
    uh = _upsample_matrix(x.shape[1], x.dtype)
    uw = _upsample_matrix(x.shape[2], x.dtype)
    y = np.einsum("oh,chw->cow", uh, x)
    y = np.einsum("pw,cow->cop", uw, y)
    return y, (uh, uw)


def upsample2x_backward(dy: np.ndarray, cache) -> np.ndarray:
    uh, uw = cache
    d = np.einsum("pw,cop->cow", uw, dy)
    return np.einsum("oh,cow->chw", uh, d)


def global_avg_pool(x: np.ndarray):
    if x.ndim != 3:
        raise ValidationError(f"pooling expects (C, H, W), got shape {x.shape}")
    return x.mean(axis=(1, 2)), x.shape


def global_avg_pool_backward(dy: np.ndarray, cache) -> np.ndarray:
    c, h, w = cache
    return np.broadcast_to(dy[:, None, None] / (h * w), (c, h, w)).astype(dy.dtype, copy=True)


def fully_connected(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    return w @ x + b, (x, w)


def fully_connected_backward(dy: np.ndarray, cache):
    x, w = cache
    return w.T @ dy, np.outer(dy, x), dy.copy()


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_cross_entropy(logits: np.ndarray, target: int):
    """Cross entropy of a softmax over logits against one target class."""
    if not 0 <= target < logits.size:
        raise ValidationError(f"target class {target} outside [0, {logits.size})")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[target])
    grad = softmax(logits)
    grad[target] -= 1.0
    return loss, grad


__all__ = [
    "conv2d",
    "conv2d_backward",
    "relu",
    "relu_backward",
    "sigmoid",
    "sigmoid_backward",
    "upsample2x",
    "upsample2x_backward",
    "global_avg_pool",
    "global_avg_pool_backward",
    "fully_connected",
    "fully_connected_backward",
    "softmax",
    "softmax_cross_entropy",
]
