"""Toy stage-wise refinement network: model, losses, training, checks."""

from .model import (
    NetConfig,
    NetworkParams,
    ForwardTrace,
    StageTargets,
    SubitizeResult,
    atrous_pool,
    coarse_head,
    encode,
    forward,
    fuse_maps,
    infer_nrss,
    infer_saliency,
    init_params,
    load_checkpoint,
    loss_and_grads,
    param_shapes,
    refine_stage,
    save_checkpoint,
    scm,
    gate_unit,
    subitize,
    subitize_loss_and_grads,
    total_loss,
)
from .losses import map_loss, map_loss_grad, stack_loss, stack_loss_grad, subitize_loss
from .train import TrainConfig, TrainResult, TrainSample, build_targets, train
from .gradcheck import check_model_gradients
from .pca import PcaVisualization, pca_visualize

__all__ = [
    "NetConfig",
    "NetworkParams",
    "ForwardTrace",
    "StageTargets",
    "SubitizeResult",
    "atrous_pool",
    "coarse_head",
    "encode",
    "forward",
    "gate_unit",
    "refine_stage",
    "scm",
    "fuse_maps",
    "infer_nrss",
    "infer_saliency",
    "init_params",
    "load_checkpoint",
    "loss_and_grads",
    "param_shapes",
    "save_checkpoint",
    "subitize",
    "subitize_loss_and_grads",
    "total_loss",
    "map_loss",
    "map_loss_grad",
    "stack_loss",
    "stack_loss_grad",
    "subitize_loss",
    "TrainConfig",
    "TrainResult",
    "TrainSample",
    "build_targets",
    "train",
    "check_model_gradients",
    "PcaVisualization",
    "pca_visualize",
]
