"""Core raster types and the nested observer-agreement stack.

An agreement map counts, per pixel, how many of N observers marked the
pixel as belonging to a salient object.  Its stacked form holds N binary
slices where slice i is 1 wherever at least i observers agree; slices are
therefore nested (slice i+1 is a subset of slice i) and sum back to the
agreement counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoInstancesError,
    StackNestingError,
    ValidationError,
)

DEFAULT_OBSERVERS = 12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_2d(values: np.ndarray, what: str) -> None:
    if values.ndim != 2:
        raise ValidationError(f"{what} must be 2-D, got shape {values.shape}")
    if values.shape[0] < 1 or values.shape[1] < 1:
        raise ValidationError(f"{what} must have at least one pixel")


@dataclass(frozen=True)
class AgreementMap:
    """Per-pixel count of observers who judged the pixel salient (0..N)."""

    values: np.ndarray  # (H, W) uint8
    n_observers: int = DEFAULT_OBSERVERS

    def __post_init__(self):
        v = np.asarray(self.values)
        _check_2d(v, "agreement map")
        if not np.issubdtype(v.dtype, np.integer):
            raise ValidationError(f"agreement values must be integers, got dtype {v.dtype}")
        n = int(self.n_observers)
        if not 1 <= n <= 255:
            raise ValidationError(f"n_observers must be in [1, 255], got {n}")
        lo, hi = int(v.min()), int(v.max())
        if lo < 0 or hi > n:
            raise ValidationError(
                f"agreement values must lie in [0, {n}], got range [{lo}, {hi}]"
            )
        object.__setattr__(self, "values", _frozen(v.astype(np.uint8)))
        object.__setattr__(self, "n_observers", n)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BinaryMap:
    """Per-pixel {0, 1} mask."""

    values: np.ndarray  # (H, W) uint8 in {0, 1}

    def __post_init__(self):
        v = np.asarray(self.values)
        _check_2d(v, "binary map")
        if not np.isin(v, (0, 1)).all():
            raise ValidationError("binary map values must be exactly 0 or 1")
        object.__setattr__(self, "values", _frozen(v.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SaliencyMap:
    """Real-valued per-pixel salience in [0, 1]."""

    values: np.ndarray  # (H, W) float64

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        _check_2d(v, "saliency map")
        if not np.isfinite(v).all():
            raise ValidationError("saliency map contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValidationError(
                f"saliency values must lie in [0, 1], got range "
                f"[{float(v.min())}, {float(v.max())}]"
            )
        object.__setattr__(self, "values", _frozen(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class InstanceMap:
    """Per-pixel instance labels; 0 is background, positive ids are objects."""

    labels: np.ndarray  # (H, W) non-negative int

    def __post_init__(self):
        v = np.asarray(self.labels)
        _check_2d(v, "instance map")
        if not np.issubdtype(v.dtype, np.integer):
            raise ValidationError(f"instance labels must be integers, got dtype {v.dtype}")
        if v.min() < 0:
            raise ValidationError("instance labels must be non-negative")
        object.__setattr__(self, "labels", _frozen(v.astype(np.int32)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def instance_ids(self) -> tuple[int, ...]:
        ids = np.unique(self.labels)
        return tuple(int(i) for i in ids if i > 0)


@dataclass(frozen=True)
class NestedStack:
    """N binary slices; slice i means "at least i observers agree"."""

    slices: np.ndarray  # (N, H, W) uint8 in {0, 1}

    def __post_init__(self):
        v = np.asarray(self.slices)
        if v.ndim != 3 or v.shape[0] < 1:
            raise ValidationError(f"stack must be (N, H, W) with N >= 1, got {v.shape}")
        _check_2d(v[0], "stack slice")
        if not np.isin(v, (0, 1)).all():
            raise ValidationError("stack slices must be binary")
        _check_nesting(v)
        object.__setattr__(self, "slices", _frozen(v.astype(np.uint8)))

    @property
    def n_observers(self) -> int:
        return self.slices.shape[0]

    @property
    def height(self) -> int:
        return self.slices.shape[1]

    @property
    def width(self) -> int:
        return self.slices.shape[2]

    def slice(self, k: int) -> BinaryMap:
        """Return slice k (1-based: "at least k observers")."""
        if not 1 <= k <= self.n_observers:
            raise ValidationError(f"slice index must be in [1, {self.n_observers}], got {k}")
        return BinaryMap(self.slices[k - 1])


def _check_nesting(slices: np.ndarray) -> None:
    if slices.shape[0] >= 2 and (slices[1:] > slices[:-1]).any():
        bad = np.argwhere(slices[1:] > slices[:-1])[0]
        raise StackNestingError(
            f"slice {int(bad[0]) + 2} exceeds slice {int(bad[0]) + 1} "
            f"at pixel ({int(bad[1])}, {int(bad[2])})"
        )


def require_same_shape(a, b, what: str = "maps") -> None:
    sa = (a.height, a.width)
    sb = (b.height, b.width)
    if sa != sb:
        raise DimensionMismatchError(f"{what} differ in size: {sa} vs {sb}")


def build_nested_stack(agreement: AgreementMap) -> NestedStack:
    """Expand an agreement map to its N nested binary slices."""
    n = agreement.n_observers
    thresholds = np.arange(1, n + 1, dtype=np.uint8)
    slices = (agreement.values[None, :, :] >= thresholds[:, None, None]).astype(np.uint8)
    return NestedStack(slices)


def collapse_stack(stack) -> AgreementMap:
    """Sum a nested stack back to an agreement map (inverse of build).

    Accepts a NestedStack or a raw (N, H, W) binary array, e.g. slices
    reloaded from disk; a nesting violation signals a corrupted stack.
    """
    if isinstance(stack, NestedStack):
        slices = stack.slices
    else:
        slices = np.asarray(stack)
        if slices.ndim != 3:
            raise ValidationError(f"stack must be (N, H, W), got shape {slices.shape}")
        if not np.isin(slices, (0, 1)).all():
            raise ValidationError("stack slices must be binary")
        _check_nesting(slices)
    counts = slices.astype(np.int64).sum(axis=0)
    return AgreementMap(counts, n_observers=slices.shape[0])


def threshold_agreement(agreement: AgreementMap, k: int) -> BinaryMap:
    """Binary map of pixels where at least k observers agree."""
    if not 1 <= k <= agreement.n_observers:
        raise ValidationError(
            f"threshold k must be in [1, {agreement.n_observers}], got {k}"
        )
    return BinaryMap((agreement.values >= k).astype(np.uint8))


def normalize_saliency(agreement: AgreementMap) -> SaliencyMap:
    """Continuous saliency: agreement count divided by N."""
    return SaliencyMap(agreement.values.astype(np.float64) / agreement.n_observers)


def _downsample_2d(values: np.ndarray, target_h: int, target_w: int, method: str) -> np.ndarray:
    h, w = values.shape
    if target_h < 1 or target_w < 1:
        raise ValidationError("target dimensions must be at least 1x1")
    if target_h > h or target_w > w:
        raise ValidationError(
            f"target {target_h}x{target_w} exceeds source {h}x{w}"
        )
    if h % target_h != 0 or w % target_w != 0:
        raise ValidationError(
            f"downsampling {h}x{w} -> {target_h}x{target_w} requires integer scale factors"
        )
    fh, fw = h // target_h, w // target_w
    if method == "area":
        blocks = values.reshape(target_h, fh, target_w, fw).astype(np.float64)
        return blocks.mean(axis=(1, 3))
    if method == "nearest":
        # centre sample of each block
        return values[fh // 2 :: fh, fw // 2 :: fw].astype(np.float64)
    raise ValidationError(f"unknown downsampling method {method!r}")


def downsample_map(values: np.ndarray, target_h: int, target_w: int, method: str = "area") -> np.ndarray:
    """Downsample one 2-D map by integer factors (area mean or nearest)."""
    return _downsample_2d(np.asarray(values), target_h, target_w, method)


def downsample_targets(
    stack: NestedStack,
    saliency: SaliencyMap,
    target_w: int,
    target_h: int,
    method: str = "area",
) -> tuple[np.ndarray, SaliencyMap]:
    """Downsample supervision targets to a stage's resolution.

    The binary slices become real-valued block means in [0, 1]; nesting
    survives as a pixelwise slice[i+1] <= slice[i] inequality.
    """
    require_same_shape(stack, saliency, "stack and saliency")
    soft = np.stack(
        [_downsample_2d(s, target_h, target_w, method) for s in stack.slices]
    )
    small = _downsample_2d(saliency.values, target_h, target_w, method)
    return soft, SaliencyMap(small)


__all__ = [
    "DEFAULT_OBSERVERS",
    "AgreementMap",
    "BinaryMap",
    "SaliencyMap",
    "InstanceMap",
    "NestedStack",
    "build_nested_stack",
    "collapse_stack",
    "threshold_agreement",
    "normalize_saliency",
    "downsample_map",
    "downsample_targets",
    "require_same_shape",
    "NoInstancesError",
]
