"""Euclidean regression losses for the stack and map predictions.

The stack loss averages squared error over spatial positions and the N
channels with a global 1/2 factor; the map loss is the single-channel
form.  Both are zero exactly at a perfect prediction and their gradients
are the scaled residuals.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .ops import softmax_cross_entropy


def _check_shapes(pred: np.ndarray, gt: np.ndarray) -> None:
    if pred.shape != gt.shape:
        raise ValidationError(f"prediction {pred.shape} and target {gt.shape} differ")


def stack_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """(1 / 2dN) * sum of squared channel-wise differences; d = h*w."""
    _check_shapes(pred, gt)
    n = pred.shape[0]
    d = pred.shape[1] * pred.shape[2]
    diff = pred.astype(np.float64) - gt.astype(np.float64)
    return float((diff * diff).sum() / (2.0 * d * n))


def stack_loss_grad(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    _check_shapes(pred, gt)
    n = pred.shape[0]
    d = pred.shape[1] * pred.shape[2]
    return (pred - gt) / np.asarray(d * n, dtype=pred.dtype)


def map_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """(1 / 2d) * sum of squared differences over a single-channel map."""
    _check_shapes(pred, gt)
    diff = pred.astype(np.float64) - gt.astype(np.float64)
    return float((diff * diff).sum() / (2.0 * pred.size))


def map_loss_grad(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    _check_shapes(pred, gt)
    return (pred - gt) / np.asarray(pred.size, dtype=pred.dtype)


def subitize_loss(intermediate: np.ndarray, final: np.ndarray, gt_class: int) -> float:
    """Sum of the softmax cross entropies of both confidence vectors."""
    l1, _ = softmax_cross_entropy(intermediate, gt_class)
    l2, _ = softmax_cross_entropy(final, gt_class)
    return l1 + l2


__all__ = [
    "stack_loss",
    "stack_loss_grad",
    "map_loss",
    "map_loss_grad",
    "subitize_loss",
]
