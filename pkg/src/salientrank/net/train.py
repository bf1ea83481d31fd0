"""Training loop for the toy network: seeded, deterministic, CPU-only.

Supervision targets are built once per sample by area-downsampling the
ground-truth stack and saliency map to each stage's resolution (and
optionally scaling them, which reproduces the scaled-ground-truth
network variant).  Batch gradients are plain sums of per-sample
gradients; fixed iteration order keeps runs bit-reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import NestedStack, SaliencyMap, downsample_map
from ..errors import TrainingDivergedError, ValidationError
from .model import (
    ForwardTrace,
    NetConfig,
    NetworkParams,
    StageTargets,
    forward,
    init_params,
    loss_and_grads,
)


@dataclass(frozen=True)
class TrainConfig:
    net: NetConfig = field(default_factory=NetConfig)
    learning_rate: float = 1e-3
    optimizer: str = "adam"  # "adam" | "sgd"
    epochs: int = 200
    batch_size: int = 5
    stage_weights: tuple[float, ...] | None = None  # default: 1 per stage
    gt_scale: float = 1.0
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ValidationError(f"unknown optimizer {self.optimizer!r}")
        if self.gt_scale <= 0:
            raise ValidationError("gt_scale must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("epochs and batch_size must be at least 1")
        if self.stage_weights is not None and any(w <= 0 for w in self.stage_weights):
            raise ValidationError("stage weights must be positive for training")


@dataclass(frozen=True)
class TrainSample:
    image: np.ndarray  # (3, H, W) in [0, 1]
    stack: NestedStack
    saliency: SaliencyMap


class Sgd:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name in tensors:
            tensors[name] -= np.asarray(self.learning_rate, dtype=tensors[name].dtype) * grads[name]


class Adam:
    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        correction = np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for name in tensors:
            dtype = tensors[name].dtype
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = b1 * self.m[name] + (1.0 - b1) * g
            self.v[name] = b2 * self.v[name] + (1.0 - b2) * (g * g)
            step = self.learning_rate * correction * self.m[name] / (np.sqrt(self.v[name]) + self.eps)
            tensors[name] -= step.astype(dtype, copy=False)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return Sgd(config.learning_rate)
    return Adam(config.learning_rate)


def build_targets(
    stack: NestedStack,
    saliency: SaliencyMap,
    net: NetConfig,
    gt_scale: float = 1.0,
    dtype=np.float32,
) -> StageTargets:
    """Area-downsampled (and optionally scaled) targets for every stage."""
    h, w = stack.height, stack.width
    stacks = []
    maps = []
    for i in range(net.refinements + 1):
        factor = 8 >> i  # stage i sits at 1/8 * 2^i of the input
        th, tw = h // factor, w // factor
        soft = np.stack([downsample_map(s, th, tw, "area") for s in stack.slices])
        small = downsample_map(saliency.values, th, tw, "area")
        stacks.append((soft * gt_scale).astype(dtype))
        maps.append((small[None, :, :] * gt_scale).astype(dtype))
    return StageTargets(stacks=tuple(stacks), maps=tuple(maps), fused_map=maps[-1])


@dataclass
class TrainResult:
    params: NetworkParams
    trajectory: list[float]               # per-epoch mean total loss
    history: list[dict[str, float]]       # per-epoch mean loss components


def train(dataset: list[TrainSample], config: TrainConfig) -> TrainResult:
    """Fit the network to a small dataset; deterministic given the seed."""
    if not dataset:
        raise ValidationError("training dataset is empty")
    dtype = np.dtype(config.dtype)
    params = init_params(config.net, seed=config.seed, dtype=dtype)
    optimizer = make_optimizer(config)

    targets = [
        build_targets(s.stack, s.saliency, config.net, config.gt_scale, dtype)
        for s in dataset
    ]
    images = [np.asarray(s.image, dtype=dtype) for s in dataset]

    n = len(dataset)
    batches = [list(range(lo, min(lo + config.batch_size, n))) for lo in range(0, n, config.batch_size)]

    trajectory: list[float] = []
    history: list[dict[str, float]] = []
    for epoch in range(config.epochs):
        epoch_parts: dict[str, float] = {}
        for batch in batches:
            grads_sum = None
            for idx in batch:
                trace: ForwardTrace = forward(images[idx], params)
                total, parts, grads = loss_and_grads(
                    trace, targets[idx], params, config.stage_weights
                )
                if not np.isfinite(total):
                    raise TrainingDivergedError(epoch, total)
                for key, value in parts.items():
                    epoch_parts[key] = epoch_parts.get(key, 0.0) + value
                if grads_sum is None:
                    grads_sum = grads
                else:
                    for name in grads_sum:
                        grads_sum[name] += grads[name]
            optimizer.step(params.tensors, grads_sum)
        means = {key: value / n for key, value in epoch_parts.items()}
        means["epoch"] = float(epoch)
        history.append(means)
        trajectory.append(means["total"])
    return TrainResult(params=params, trajectory=trajectory, history=history)


__all__ = [
    "TrainConfig",
    "TrainSample",
    "TrainResult",
    "Sgd",
    "Adam",
    "make_optimizer",
    "build_targets",
    "train",
]
