"""Principal-component visualization of a predicted salience stack.

Pixels are treated as N-dimensional samples (one dimension per stack
channel); the top three principal components are projected, min-max
normalized, and mapped to the R, G and B channels in order of explained
variance.  Components without variance are rendered black and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class PcaVisualization:
    rgb: np.ndarray                 # (H, W, 3) uint8
    eigenvalues: tuple[float, float, float]
    n_components: int               # usable (positive-variance) components, <= 3
    degenerate: bool                # True when fewer than 3 components exist


def channel_covariance(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered pixel samples and their (N, N) channel covariance (1/n norm)."""
    if stack.ndim != 3:
        raise ValidationError(f"stack must be (N, H, W), got shape {stack.shape}")
    n_channels = stack.shape[0]
    samples = stack.reshape(n_channels, -1).T.astype(np.float64)
    centered = samples - samples.mean(axis=0)
    cov = centered.T @ centered / samples.shape[0]
    return centered, cov


def _orient(vec: np.ndarray) -> np.ndarray:
    # fixed sign convention: largest-magnitude entry is positive
    pivot = int(np.argmax(np.abs(vec)))
    return -vec if vec[pivot] < 0 else vec


def pca_visualize(stack: np.ndarray, variance_floor: float = 1e-12) -> PcaVisualization:
    """Render the top three principal components of a stack as RGB."""
    centered, cov = channel_covariance(stack)
    h, w = stack.shape[1], stack.shape[2]
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    scale = max(float(eigvals[0]), 0.0)
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    used = 0
    top = [0.0, 0.0, 0.0]
    for k in range(min(3, eigvals.size)):
        value = float(eigvals[k])
        top[k] = value
        if value <= variance_floor or value <= scale * variance_floor:
            continue
        projection = centered @ _orient(eigvecs[:, k])
        lo, hi = float(projection.min()), float(projection.max())
        if hi <= lo:
            continue
        normalized = (projection - lo) / (hi - lo)
        rgb[:, :, k] = np.rint(normalized.reshape(h, w) * 255.0).astype(np.uint8)
        used += 1
    return PcaVisualization(
        rgb=rgb,
        eigenvalues=(top[0], top[1], top[2]),
        n_components=used,
        degenerate=used < 3,
    )


def power_iteration_components(cov: np.ndarray, k: int = 3, iterations: int = 500,
                               seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs by power iteration with deflation (oracle-grade)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    a = cov.astype(np.float64).copy()
    values = np.zeros(k)
    vectors = np.zeros((cov.shape[0], k))
    for j in range(k):
        v = rng.normal(size=cov.shape[0])
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            v = a @ v
            norm = np.linalg.norm(v)
            if norm == 0.0:
                break
            v /= norm
        lam = float(v @ a @ v)
        values[j] = lam
        vectors[:, j] = v
        a = a - lam * np.outer(v, v)
    return values, vectors


__all__ = [
    "PcaVisualization",
    "channel_covariance",
    "pca_visualize",
    "power_iteration_components",
]
