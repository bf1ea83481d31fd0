"""Toy stage-wise refinement network predicting nested salience stacks.

A small four-stage encoder (factor-8 downsampling) feeds a 12-channel
stack head.  Each refinement unit doubles the stack's resolution: the
previous stack is upsampled, combined with a gated pair of consecutive
encoder features, and transformed back to 12 channels; a three-layer
collapse module (12 -> 6 -> 3 -> 1) turns every stack into a saliency
map.  A 1x1 fusion over all stage maps yields the final prediction, so
a run with T total predictions has T-1 stage-wise maps plus one fused
map.  Forward passes cache every intermediate needed for the exact
analytic backward pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .losses import map_loss, map_loss_grad, stack_loss, stack_loss_grad, subitize_loss
from .ops import (
    conv2d,
    conv2d_backward,
    fully_connected,
    fully_connected_backward,
    global_avg_pool,
    relu,
    relu_backward,
    sigmoid,
    sigmoid_backward,
    softmax_cross_entropy,
    upsample2x,
    upsample2x_backward,
)

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetConfig:
    """Architecture plan; `stages` counts total predictions (fused + stage-wise)."""

    stages: int = 4
    encoder_channels: tuple[int, int, int, int] = (16, 32, 64, 64)
    n_observers: int = 12
    n_classes: int = 4
    atrous: bool = False
    atrous_dilations: tuple[int, ...] = (1, 2, 4)
    tf_hidden: int = 16
    scm_channels: tuple[int, int] = (6, 3)

    def __post_init__(self):
        if not 3 <= self.stages <= 5:
            raise ValidationError(
                f"stages must be in [3, 5] (1 coarse + 1..3 refinements + fusion), got {self.stages}"
            )
        if len(self.encoder_channels) != 4:
            raise ValidationError("encoder_channels must list 4 stages")

    @property
    def refinements(self) -> int:
        return self.stages - 2


def param_shapes(config: NetConfig) -> dict[str, tuple[int, ...]]:
    """Canonical parameter tensors in a fixed order (drives init and I/O)."""
    ch = config.encoder_channels
    n = config.n_observers
    s1, s2 = config.scm_channels
    shapes: dict[str, tuple[int, ...]] = {}
    in_ch = 3
    for i, c in enumerate(ch, start=1):
        shapes[f"enc{i}.w"] = (c, in_ch, 3, 3)
        shapes[f"enc{i}.b"] = (c,)
        in_ch = c
    if config.atrous:
        for j, _ in enumerate(config.atrous_dilations, start=1):
            shapes[f"atrous{j}.w"] = (ch[3], ch[3], 3, 3)
            shapes[f"atrous{j}.b"] = (ch[3],)
    shapes["head.w"] = (n, ch[3], 3, 3)
    shapes["head.b"] = (n,)
    for s in range(config.refinements + 1):
        shapes[f"scm{s}.c1.w"] = (s1, n, 3, 3)
        shapes[f"scm{s}.c1.b"] = (s1,)
        shapes[f"scm{s}.c2.w"] = (s2, s1, 3, 3)
        shapes[f"scm{s}.c2.b"] = (s2,)
        shapes[f"scm{s}.c3.w"] = (1, s2, 1, 1)
        shapes[f"scm{s}.c3.b"] = (1,)
    for i in range(1, config.refinements + 1):
        shallow, deep = ch[3 - i], ch[4 - i]
        shapes[f"gate{i}.w"] = (shallow, deep, 1, 1)
        shapes[f"gate{i}.b"] = (shallow,)
        shapes[f"tf{i}.c1.w"] = (config.tf_hidden, shallow + n, 3, 3)
        shapes[f"tf{i}.c1.b"] = (config.tf_hidden,)
        shapes[f"tf{i}.c2.w"] = (n, config.tf_hidden, 3, 3)
        shapes[f"tf{i}.c2.b"] = (n,)
    shapes["fuse.w"] = (1, config.refinements + 1, 1, 1)
    shapes["fuse.b"] = (1,)
    shapes["sub1.w"] = (config.n_classes, ch[2])
    shapes["sub1.b"] = (config.n_classes,)
    shapes["sub2.w"] = (config.n_classes, config.n_classes)
    shapes["sub2.b"] = (config.n_classes,)
    return shapes


@dataclass
class NetworkParams:
    """All trainable tensors of one network instance."""

    config: NetConfig
    tensors: dict[str, np.ndarray]
    seed: int = 0

    @property
    def dtype(self) -> np.dtype:
        return self.tensors["enc1.w"].dtype

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            config=self.config,
            tensors={k: v.copy() for k, v in self.tensors.items()},
            seed=self.seed,
        )

    def astype(self, dtype) -> "NetworkParams":
        return NetworkParams(
            config=self.config,
            tensors={k: v.astype(dtype) for k, v in self.tensors.items()},
            seed=self.seed,
        )

    def zeros_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}


def init_params(config: NetConfig, seed: int = 0, dtype=np.float32) -> NetworkParams:
    """Uniform fan-in initialization of weights; biases start at zero."""
    rng = np.random.Generator(np.random.PCG64(seed))
    tensors: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(".b"):
            tensors[name] = np.zeros(shape, dtype=dtype)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = 1.0 / np.sqrt(fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return NetworkParams(config=config, tensors=tensors, seed=seed)


def scm(stack: np.ndarray, params: NetworkParams, stage: int = 0,
        caches: dict | None = None) -> np.ndarray:
    """Collapse a predicted stack to one saliency map (N -> 6 -> 3 -> 1)."""
    if stack.ndim != 3 or stack.shape[0] != params.config.n_observers:
        raise ValidationError(
            f"collapse module expects ({params.config.n_observers}, H, W), got {stack.shape}"
        )
    caches = {} if caches is None else caches
    prefix = f"scm{stage}"
    t = params.tensors
    a1, caches[f"{prefix}.c1"] = conv2d(stack, t[f"{prefix}.c1.w"], t[f"{prefix}.c1.b"])
    r1, caches[f"{prefix}.m1"] = relu(a1)
    a2, caches[f"{prefix}.c2"] = conv2d(r1, t[f"{prefix}.c2.w"], t[f"{prefix}.c2.b"])
    r2, caches[f"{prefix}.m2"] = relu(a2)
    y, caches[f"{prefix}.c3"] = conv2d(r2, t[f"{prefix}.c3.w"], t[f"{prefix}.c3.b"])
    return y


def _scm_backward(dy: np.ndarray, prefix: str, caches: dict, grads: dict) -> np.ndarray:
    dr2, dw3, db3 = conv2d_backward(dy, caches[f"{prefix}.c3"])
    grads[f"{prefix}.c3.w"] += dw3
    grads[f"{prefix}.c3.b"] += db3
    da2 = relu_backward(dr2, caches[f"{prefix}.m2"])
    dr1, dw2, db2 = conv2d_backward(da2, caches[f"{prefix}.c2"])
    grads[f"{prefix}.c2.w"] += dw2
    grads[f"{prefix}.c2.b"] += db2
    da1 = relu_backward(dr1, caches[f"{prefix}.m1"])
    dx, dw1, db1 = conv2d_backward(da1, caches[f"{prefix}.c1"])
    grads[f"{prefix}.c1.w"] += dw1
    grads[f"{prefix}.c1.b"] += db1
    return dx


def atrous_pool(feature: np.ndarray, params: NetworkParams, caches: dict | None = None) -> np.ndarray:
    """Sum of parallel dilated 3x3 convolutions over the deepest feature."""
    if min(feature.shape[1], feature.shape[2]) < 2:
        raise ValidationError(
            f"feature {feature.shape[1]}x{feature.shape[2]} is smaller than the "
            "dilated kernel footprint; atrous pooling needs at least 2x2"
        )
    caches = {} if caches is None else caches
    t = params.tensors
    out = None
    for j, d in enumerate(params.config.atrous_dilations, start=1):
        y, caches[f"atrous{j}"] = conv2d(feature, t[f"atrous{j}.w"], t[f"atrous{j}.b"], dilation=d)
        out = y if out is None else out + y
    return out


def _atrous_backward(dy: np.ndarray, config: NetConfig, caches: dict, grads: dict) -> np.ndarray:
    dx = None
    for j in range(1, len(config.atrous_dilations) + 1):
        dxj, dwj, dbj = conv2d_backward(dy, caches[f"atrous{j}"])
        grads[f"atrous{j}.w"] += dwj
        grads[f"atrous{j}.b"] += dbj
        dx = dxj if dx is None else dx + dxj
    return dx


def coarse_head(feature: np.ndarray, params: NetworkParams,
                caches: dict | None = None) -> np.ndarray:
    """Initial stack prediction: one 3x3 convolution to N channels."""
    caches = {} if caches is None else caches
    y, caches["head"] = conv2d(feature, params.tensors["head.w"], params.tensors["head.b"])
    return y


def gate_unit(shallow: np.ndarray, deep: np.ndarray, params: NetworkParams,
              stage: int, caches: dict | None = None) -> np.ndarray:
    """Multiplicative gate over a pair of consecutive encoder features.

    The deeper (half-resolution) feature is upsampled, squashed through a
    1x1 convolution and a logistic, and gates the shallower feature
    elementwise, controlling what flows into the refinement stage.
    """
    if (deep.shape[1] * 2, deep.shape[2] * 2) != (shallow.shape[1], shallow.shape[2]):
        raise ValidationError(
            f"gate expects the deep feature at exactly half resolution: "
            f"{deep.shape} vs {shallow.shape}"
        )
    caches = {} if caches is None else caches
    t = params.tensors
    dup, caches[f"gate{stage}.up"] = upsample2x(deep)
    glin, caches[f"gate{stage}.conv"] = conv2d(dup, t[f"gate{stage}.w"], t[f"gate{stage}.b"])
    gs = sigmoid(glin)
    caches[f"gate{stage}.sig"] = gs
    return shallow * gs


def refine_stage(nrss_prev: np.ndarray, gated: np.ndarray, params: NetworkParams,
                 stage: int, caches: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One refinement unit: double the stack's resolution and re-collapse.

    The previous stack is upsampled to the gated feature's grid,
    concatenated with it, and transformed back to N channels; only the
    refined stack feeds the next stage, but each stage also emits its
    own saliency map for supervision and fusion.
    """
    if (nrss_prev.shape[1] * 2, nrss_prev.shape[2] * 2) != (gated.shape[1], gated.shape[2]):
        raise ValidationError(
            f"refinement expects the gate at twice the stack resolution: "
            f"{gated.shape} vs {nrss_prev.shape}"
        )
    caches = {} if caches is None else caches
    t = params.tensors
    nup, caches[f"tf{stage}.up"] = upsample2x(nrss_prev)
    cat = np.concatenate([gated, nup], axis=0)
    caches[f"tf{stage}.split"] = gated.shape[0]
    h1, caches[f"tf{stage}.c1"] = conv2d(cat, t[f"tf{stage}.c1.w"], t[f"tf{stage}.c1.b"])
    h1r, caches[f"tf{stage}.mask"] = relu(h1)
    nrss_next, caches[f"tf{stage}.c2"] = conv2d(h1r, t[f"tf{stage}.c2.w"], t[f"tf{stage}.c2.b"])
    saliency_next = scm(nrss_next, params, stage, caches)
    return nrss_next, saliency_next


@dataclass
class ForwardTrace:
    """All intermediates of one forward pass; consumed by the backward pass."""

    params: NetworkParams
    input_shape: tuple[int, ...]
    features: list[np.ndarray]
    nrss: list[np.ndarray]
    saliency: list[np.ndarray]
    fused: np.ndarray
    caches: dict = field(repr=False, default_factory=dict)

    @property
    def n_predictions(self) -> int:
        return len(self.saliency) + 1


def _check_image(image: np.ndarray) -> np.ndarray:
    x = np.asarray(image)
    if x.ndim != 3 or x.shape[0] != 3:
        raise ValidationError(f"image must be (3, H, W), got shape {x.shape}")
    h, w = x.shape[1], x.shape[2]
    if h % 8 != 0 or w % 8 != 0 or h < 8 or w < 8:
        raise ValidationError(
            f"image size {h}x{w} must be a multiple of 8 in both dimensions "
            "(factor-8 encoder); pad the input first"
        )
    return x


def encode(image: np.ndarray, params: NetworkParams, caches: dict | None = None) -> list[np.ndarray]:
    """Four ReLU conv stages at scales 1/1, 1/2, 1/4, 1/8."""
    x = _check_image(image).astype(params.dtype, copy=False)
    caches = {} if caches is None else caches
    t = params.tensors
    features = []
    cur = x
    for i in range(1, 5):
        stride = 1 if i == 1 else 2
        z, caches[f"enc{i}"] = conv2d(cur, t[f"enc{i}.w"], t[f"enc{i}.b"], stride=stride)
        cur, caches[f"enc{i}.mask"] = relu(z)
        features.append(cur)
    return features


def forward(image: np.ndarray, params: NetworkParams) -> ForwardTrace:
    """Coarse stack + refinement stages + fused map, with cached intermediates."""
    caches: dict = {}
    t = params.tensors
    cfg = params.config
    n_refine = cfg.refinements

    features = encode(image, params, caches)
    deepest = features[3]
    if cfg.atrous:
        deepest = atrous_pool(deepest, params, caches)

    nrss = [coarse_head(deepest, params, caches)]
    saliency = [scm(nrss[0], params, 0, caches)]

    for i in range(1, n_refine + 1):
        gated = gate_unit(features[3 - i], features[4 - i], params, i, caches)
        nrss_i, sal_i = refine_stage(nrss[i - 1], gated, params, i, caches)
        nrss.append(nrss_i)
        saliency.append(sal_i)

    upsampled = []
    for i, sal in enumerate(saliency):
        chain = []
        cur = sal
        for _ in range(n_refine - i):
            cur, cache = upsample2x(cur)
            chain.append(cache)
        caches[f"fuse.chain{i}"] = chain
        upsampled.append(cur)
    fused_in = np.concatenate(upsampled, axis=0)
    fused, caches["fuse.conv"] = conv2d(fused_in, t["fuse.w"], t["fuse.b"])

    return ForwardTrace(
        params=params,
        input_shape=tuple(np.asarray(image).shape),
        features=features,
        nrss=nrss,
        saliency=saliency,
        fused=fused,
        caches=caches,
    )


@dataclass(frozen=True)
class StageTargets:
    """Per-stage supervision targets at each stage's own resolution."""

    stacks: tuple[np.ndarray, ...]   # (N, h_t, w_t) real-valued
    maps: tuple[np.ndarray, ...]     # (1, h_t, w_t)
    fused_map: np.ndarray            # (1, h_last, w_last)


def _stage_weights(config: NetConfig, weights) -> list[float]:
    n_stage = config.refinements + 1
    if weights is None:
        return [1.0] * n_stage
    weights = list(weights)
    if len(weights) != n_stage:
        raise ValidationError(
            f"need {n_stage} stage weights (one per stage-wise prediction), got {len(weights)}"
        )
    if any(w < 0 for w in weights):
        raise ValidationError("stage weights must be non-negative")
    return [float(w) for w in weights]


def total_loss(trace: ForwardTrace, targets: StageTargets, stage_weights=None) -> tuple[float, dict]:
    """Master loss on the fused map plus weighted per-stage auxiliary losses."""
    cfg = trace.params.config
    lam = _stage_weights(cfg, stage_weights)
    if len(targets.stacks) != len(trace.nrss):
        raise ValidationError(
            f"expected {len(trace.nrss)} stage targets, got {len(targets.stacks)}"
        )
    parts: dict = {"master": map_loss(trace.fused, targets.fused_map)}
    total = parts["master"]
    for i, (nrss_i, sal_i) in enumerate(zip(trace.nrss, trace.saliency)):
        ls = stack_loss(nrss_i, targets.stacks[i])
        lm = map_loss(sal_i, targets.maps[i])
        parts[f"stack{i}"] = ls
        parts[f"map{i}"] = lm
        total += lam[i] * (ls + lm)
    parts["total"] = total
    return total, parts


def loss_and_grads(
    trace: ForwardTrace,
    targets: StageTargets,
    params: NetworkParams,
    stage_weights=None,
) -> tuple[float, dict, dict[str, np.ndarray]]:
    """Total loss plus exact gradients for every parameter tensor."""
    if trace.params is not params:
        raise ValidationError("stale trace: it was produced by different parameters")
    cfg = params.config
    lam = _stage_weights(cfg, stage_weights)
    caches = trace.caches
    total, parts = total_loss(trace, targets, stage_weights)
    grads = params.zeros_grads()
    n_refine = cfg.refinements
    dtype = params.dtype

    # fused map and fusion layer
    dfused = map_loss_grad(trace.fused, targets.fused_map).astype(dtype, copy=False)
    dfused_in, dwf, dbf = conv2d_backward(dfused, caches["fuse.conv"])
    grads["fuse.w"] += dwf
    grads["fuse.b"] += dbf

    # stage saliency gradients: fusion contribution + direct supervision
    dsal = []
    for i in range(n_refine + 1):
        d = dfused_in[i : i + 1]
        for cache in reversed(caches[f"fuse.chain{i}"]):
            d = upsample2x_backward(d, cache)
        d = d + lam[i] * map_loss_grad(trace.saliency[i], targets.maps[i]).astype(dtype, copy=False)
        dsal.append(d)

    # stack gradients: collapse-module contribution + direct supervision
    dnrss = []
    for i in range(n_refine + 1):
        d = _scm_backward(dsal[i], f"scm{i}", caches, grads)
        d = d + lam[i] * stack_loss_grad(trace.nrss[i], targets.stacks[i]).astype(dtype, copy=False)
        dnrss.append(d)

    dfeat = [np.zeros_like(f) for f in trace.features]

    # refinement units, finest first
    for i in range(n_refine, 0, -1):
        dh1r, dw2, db2 = conv2d_backward(dnrss[i], caches[f"tf{i}.c2"])
        grads[f"tf{i}.c2.w"] += dw2
        grads[f"tf{i}.c2.b"] += db2
        dh1 = relu_backward(dh1r, caches[f"tf{i}.mask"])
        dcat, dw1, db1 = conv2d_backward(dh1, caches[f"tf{i}.c1"])
        grads[f"tf{i}.c1.w"] += dw1
        grads[f"tf{i}.c1.b"] += db1

        split = caches[f"tf{i}.split"]
        dgated, dnup = dcat[:split], dcat[split:]
        dnrss[i - 1] = dnrss[i - 1] + upsample2x_backward(dnup, caches[f"tf{i}.up"])

        gs = caches[f"gate{i}.sig"]
        shallow = trace.features[3 - i]
        dfeat[3 - i] += dgated * gs
        dglin = sigmoid_backward(dgated * shallow, gs)
        ddup, dwg, dbg = conv2d_backward(dglin, caches[f"gate{i}.conv"])
        grads[f"gate{i}.w"] += dwg
        grads[f"gate{i}.b"] += dbg
        dfeat[4 - i] += upsample2x_backward(ddup, caches[f"gate{i}.up"])

    # coarse head and (optionally) the atrous branches
    ddeepest, dwh, dbh = conv2d_backward(dnrss[0], caches["head"])
    grads["head.w"] += dwh
    grads["head.b"] += dbh
    if cfg.atrous:
        dfeat[3] += _atrous_backward(ddeepest, cfg, caches, grads)
    else:
        dfeat[3] += ddeepest

    # encoder, deepest stage first
    upstream = None
    for i in range(4, 0, -1):
        d = dfeat[i - 1] if upstream is None else dfeat[i - 1] + upstream
        dz = relu_backward(d, caches[f"enc{i}.mask"])
        dx, dw, db = conv2d_backward(dz, caches[f"enc{i}"])
        grads[f"enc{i}.w"] += dw
        grads[f"enc{i}.b"] += db
        upstream = dx

    return total, parts, grads


@dataclass
class SubitizeResult:
    """Intermediate and final per-class confidences plus backprop caches."""

    intermediate: np.ndarray
    final: np.ndarray
    caches: dict = field(repr=False, default_factory=dict)


def subitize(image: np.ndarray, params: NetworkParams) -> SubitizeResult:
    """Count-class confidences from the shared encoder (last stage dropped)."""
    caches: dict = {}
    features = encode(image, params, caches)
    pooled, caches["gap"] = global_avg_pool(features[2])
    t = params.tensors
    inter, caches["sub1"] = fully_connected(pooled, t["sub1.w"], t["sub1.b"])
    final, caches["sub2"] = fully_connected(inter, t["sub2.w"], t["sub2.b"])
    return SubitizeResult(intermediate=inter, final=final, caches=caches)


def subitize_loss_and_grads(
    result: SubitizeResult, gt_class: int, params: NetworkParams
) -> tuple[float, dict[str, np.ndarray]]:
    """Dual cross-entropy loss and gradients for the two confidence layers."""
    n = params.config.n_classes
    if not 0 <= gt_class < n:
        raise ValidationError(f"class index {gt_class} outside [0, {n})")
    loss = subitize_loss(result.intermediate, result.final, gt_class)
    _, dfinal = softmax_cross_entropy(result.final, gt_class)
    dinter, dw2, db2 = fully_connected_backward(dfinal.astype(params.dtype), result.caches["sub2"])
    _, dinter_direct = softmax_cross_entropy(result.intermediate, gt_class)
    dinter = dinter + dinter_direct.astype(params.dtype)
    _, dw1, db1 = fully_connected_backward(dinter, result.caches["sub1"])
    grads = {"sub1.w": dw1, "sub1.b": db1, "sub2.w": dw2, "sub2.b": db2}
    return loss, grads


def fuse_maps(stage_maps: list[np.ndarray], params: NetworkParams) -> np.ndarray:
    """Upsample stage maps to the finest grid, concatenate, apply the 1x1 mix."""
    if len(stage_maps) < 2:
        raise ValidationError("fusion needs at least 2 stage maps")
    target = max(m.shape[1] for m in stage_maps)
    ups = []
    for m in stage_maps:
        cur = m
        while cur.shape[1] < target:
            cur, _ = upsample2x(cur)
        if cur.shape[1] != target:
            raise ValidationError("stage maps are not power-of-two multiples of each other")
        ups.append(cur)
    cat = np.concatenate(ups, axis=0)
    y, _ = conv2d(cat, params.tensors["fuse.w"], params.tensors["fuse.b"])
    return y


def infer_saliency(image: np.ndarray, params: NetworkParams) -> np.ndarray:
    """Fused prediction clamped to [0, 1] and upsampled to the input size."""
    trace = forward(image, params)
    out = np.clip(trace.fused, 0.0, 1.0)
    target_h = trace.input_shape[1]
    while out.shape[1] < target_h:
        out, _ = upsample2x(out)
    return out[0].astype(np.float64)


def infer_nrss(image: np.ndarray, params: NetworkParams) -> np.ndarray:
    """Final refined stack (the last stage-wise prediction)."""
    return forward(image, params).nrss[-1]


def save_checkpoint(params: NetworkParams, path) -> None:
    """Write a self-describing npz: a JSON header plus named weight arrays."""
    cfg = params.config
    meta = {
        "format": "salientrank-checkpoint",
        "version": CHECKPOINT_VERSION,
        "seed": params.seed,
        "dtype": str(np.dtype(params.dtype)),
        "config": {
            "stages": cfg.stages,
            "encoder_channels": list(cfg.encoder_channels),
            "n_observers": cfg.n_observers,
            "n_classes": cfg.n_classes,
            "atrous": cfg.atrous,
            "atrous_dilations": list(cfg.atrous_dilations),
            "tf_hidden": cfg.tf_hidden,
            "scm_channels": list(cfg.scm_channels),
        },
        "tensors": list(params.tensors.keys()),
    }
    arrays = {f"param/{k}": np.ascontiguousarray(v) for k, v in params.tensors.items()}
    np.savez(path, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def load_checkpoint(path) -> NetworkParams:
    with np.load(path, allow_pickle=False) as data:
        if "meta" not in data:
            raise ValidationError(f"{path} is not a checkpoint (missing header)")
        meta = json.loads(str(data["meta"][()]))
        if meta.get("format") != "salientrank-checkpoint":
            raise ValidationError(f"{path} has an unknown checkpoint format")
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValidationError(
                f"checkpoint version {meta.get('version')} unsupported "
                f"(expected {CHECKPOINT_VERSION})"
            )
        c = meta["config"]
        config = NetConfig(
            stages=c["stages"],
            encoder_channels=tuple(c["encoder_channels"]),
            n_observers=c["n_observers"],
            n_classes=c["n_classes"],
            atrous=c["atrous"],
            atrous_dilations=tuple(c["atrous_dilations"]),
            tf_hidden=c["tf_hidden"],
            scm_channels=tuple(c["scm_channels"]),
        )
        expected = param_shapes(config)
        tensors = {}
        for name in meta["tensors"]:
            arr = data[f"param/{name}"]
            if name not in expected or tuple(arr.shape) != expected[name]:
                raise ValidationError(f"checkpoint tensor {name} has unexpected shape {arr.shape}")
            tensors[name] = arr
        missing = set(expected) - set(tensors)
        if missing:
            raise ValidationError(f"checkpoint is missing tensors: {sorted(missing)}")
    return NetworkParams(config=config, tensors=tensors, seed=meta["seed"])


__all__ = [
    "CHECKPOINT_VERSION",
    "NetConfig",
    "NetworkParams",
    "param_shapes",
    "init_params",
    "encode",
    "atrous_pool",
    "coarse_head",
    "scm",
    "gate_unit",
    "refine_stage",
    "forward",
    "ForwardTrace",
    "StageTargets",
    "total_loss",
    "loss_and_grads",
    "SubitizeResult",
    "subitize",
    "subitize_loss_and_grads",
    "fuse_maps",
    "infer_saliency",
    "infer_nrss",
    "save_checkpoint",
    "load_checkpoint",
]
