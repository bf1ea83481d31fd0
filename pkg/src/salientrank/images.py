"""Reading and writing the raster file formats used by the datasets.

Agreement maps and binary masks are single-channel 8-bit PNG or PGM
files (binary masks use {0, 255} on disk), saliency maps are 8-bit with
value/255 mapped to [0, 1], and instance maps are single-channel 16-bit
PNG files whose pixel values are instance labels (0 = background).
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .core import AgreementMap, BinaryMap, InstanceMap, SaliencyMap
from .errors import DataError

_GRAY8_MODES = ("L", "P")
_GRAY16_MODES = ("I", "I;16", "I;16B", "I;16L")


def _open(path) -> Image.Image:
    try:
        return Image.open(path)
    except FileNotFoundError:
        raise DataError(f"image file not found: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from None


def _load_gray8(path) -> np.ndarray:
    with _open(path) as img:
        if img.mode not in _GRAY8_MODES:
            raise DataError(
                f"{path}: expected single-channel 8-bit image, got mode {img.mode!r}"
            )
        return np.asarray(img.convert("L"), dtype=np.uint8)


def load_agreement(path, n_observers: int = 12) -> AgreementMap:
    """Load an agreement map whose raw pixel values are observer counts."""
    return AgreementMap(_load_gray8(path), n_observers=n_observers)


def save_agreement(agreement: AgreementMap, path) -> None:
    Image.fromarray(agreement.values, mode="L").save(path)


def load_binary(path) -> BinaryMap:
    """Load a {0, 255} mask and map it to {0, 1}."""
    raw = _load_gray8(path)
    if not np.isin(raw, (0, 255)).all():
        raise DataError(f"{path}: binary mask must contain only 0 and 255")
    return BinaryMap((raw > 0).astype(np.uint8))


def save_binary(mask: BinaryMap, path) -> None:
    Image.fromarray(mask.values * np.uint8(255), mode="L").save(path)


def load_saliency(path) -> SaliencyMap:
    """Load an 8-bit saliency map, scaling values to [0, 1]."""
    return SaliencyMap(_load_gray8(path).astype(np.float64) / 255.0)


def save_saliency(saliency: SaliencyMap, path) -> None:
    quantized = np.rint(saliency.values * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(path)


def load_instances(path) -> InstanceMap:
    """Load a 16-bit label image; values are instance ids."""
    with _open(path) as img:
        if img.mode in _GRAY16_MODES:
            labels = np.asarray(img, dtype=np.int32)
        elif img.mode in _GRAY8_MODES:
            labels = np.asarray(img.convert("L"), dtype=np.int32)
        else:
            raise DataError(
                f"{path}: expected single-channel label image, got mode {img.mode!r}"
            )
    if labels.min() < 0 or labels.max() > 65535:
        raise DataError(f"{path}: instance labels must fit 16 bits")
    return InstanceMap(labels)


def save_instances(instances: InstanceMap, path) -> None:
    if instances.labels.max() > 65535:
        raise DataError("instance labels exceed the 16-bit file range")
    Image.fromarray(instances.labels.astype("<u2")).save(path)


def load_rgb(path) -> np.ndarray:
    """Load an RGB image as a (3, H, W) float array in [0, 1]."""
    with _open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def save_rgb(values: np.ndarray, path) -> None:
    """Save a (3, H, W) float array in [0, 1] or (H, W, 3) uint8 as PNG."""
    arr = np.asarray(values)
    if arr.ndim == 3 and arr.shape[0] == 3 and arr.dtype != np.uint8:
        arr = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8).transpose(1, 2, 0)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise DataError("expected (3, H, W) floats or (H, W, 3) uint8")
    Image.fromarray(arr, mode="RGB").save(path)


def image_size(path) -> tuple[int, int]:
    """Return (height, width) without decoding the whole file."""
    with _open(path) as img:
        w, h = img.size
    return h, w


__all__ = [
    "load_agreement",
    "save_agreement",
    "load_binary",
    "save_binary",
    "load_saliency",
    "save_saliency",
    "load_instances",
    "save_instances",
    "load_rgb",
    "save_rgb",
    "image_size",
]
