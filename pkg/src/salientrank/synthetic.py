"""Seeded synthetic datasets: shapes with per-instance agreement levels.

Each image contains a few non-overlapping rectangles or ellipses over a
noisy background.  Every shape carries an agreement level (how many of
the N observers would mark it), rendered with brightness that grows
with its level so the toy network has a learnable cue.  Agreement,
instance, and image rasters plus a manifest are written to disk;
identical specs and seeds produce byte-identical datasets.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AgreementMap, InstanceMap
from .errors import ValidationError
from .images import save_agreement, save_instances, save_rgb
from .manifest import ManifestRecord, write_manifest

PLACEMENT_RETRIES = 200


@dataclass(frozen=True)
class SyntheticSpec:
    canvas: int = 64
    n_images: int = 10
    min_instances: int = 1
    max_instances: int = 8
    n_observers: int = 12
    levels: tuple[int, ...] | None = None  # default: all of 1..n_observers
    shapes: tuple[str, ...] = ("rectangle", "ellipse")
    seed: int = 0

    def __post_init__(self):
        if self.canvas < 16:
            raise ValidationError("canvas must be at least 16 pixels")
        if not 1 <= self.min_instances <= self.max_instances:
            raise ValidationError("need 1 <= min_instances <= max_instances")
        if self.levels is not None:
            bad = [v for v in self.levels if not 1 <= v <= self.n_observers]
            if bad or len(set(self.levels)) != len(self.levels):
                raise ValidationError(
                    f"levels must be distinct values in [1, {self.n_observers}]"
                )
        if self.max_instances > len(self.level_pool):
            raise ValidationError(
                "max_instances cannot exceed the level pool (levels are drawn without replacement)"
            )
        unknown = set(self.shapes) - {"rectangle", "ellipse"}
        if unknown:
            raise ValidationError(f"unknown shape kinds: {sorted(unknown)}")

    @property
    def level_pool(self) -> tuple[int, ...]:
        if self.levels is not None:
            return self.levels
        return tuple(range(1, self.n_observers + 1))


def _shape_mask(kind: str, h: int, w: int) -> np.ndarray:
    if kind == "rectangle":
        return np.ones((h, w), dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    return ((yy - cy) / (h / 2.0)) ** 2 + ((xx - cx) / (w / 2.0)) ** 2 <= 1.0


def synthesize_image(rng: np.random.Generator, spec: SyntheticSpec):
    """One sample: (rgb (3,H,W) float, AgreementMap, InstanceMap, count)."""
    size = spec.canvas
    n_instances = int(rng.integers(spec.min_instances, spec.max_instances + 1))
    levels = rng.choice(np.array(spec.level_pool), size=n_instances, replace=False)

    agreement = np.zeros((size, size), dtype=np.int32)
    labels = np.zeros((size, size), dtype=np.int32)
    occupied = np.zeros((size, size), dtype=bool)

    lo = max(6, size // 8)
    hi = max(lo + 1, size // 3)
    placed_colors = []
    for idx in range(n_instances):
        placed = False
        for _ in range(PLACEMENT_RETRIES):
            h = int(rng.integers(lo, hi + 1))
            w = int(rng.integers(lo, hi + 1))
            top = int(rng.integers(0, size - h + 1))
            left = int(rng.integers(0, size - w + 1))
            kind = spec.shapes[int(rng.integers(0, len(spec.shapes)))]
            mask = _shape_mask(kind, h, w)
            region = occupied[top : top + h, left : left + w]
            if (region & mask).any():
                continue
            region |= mask
            agreement[top : top + h, left : left + w][mask] = int(levels[idx])
            labels[top : top + h, left : left + w][mask] = idx + 1
            placed = True
            break
        if not placed:
            raise ValidationError(
                f"could not place instance {idx + 1}/{n_instances} after "
                f"{PLACEMENT_RETRIES} attempts (canvas too crowded)"
            )
        placed_colors.append(rng.uniform(0.7, 1.0, size=3))

    rgb = rng.uniform(0.15, 0.35, size=(3, size, size))
    for idx, color in enumerate(placed_colors):
        mask = labels == idx + 1
        level = agreement[mask][0]
        brightness = 0.25 + 0.75 * level / spec.n_observers
        for c in range(3):
            rgb[c][mask] = color[c] * brightness
    rgb += rng.normal(0.0, 0.02, size=rgb.shape)
    rgb = np.clip(rgb, 0.0, 1.0)

    return (
        rgb,
        AgreementMap(agreement, n_observers=spec.n_observers),
        InstanceMap(labels),
        n_instances,
    )


def generate_synthetic(spec: SyntheticSpec, out_dir) -> Path:
    """Write a full dataset under out_dir and return the manifest path."""
    out = Path(out_dir)
    for sub in ("images", "agreement", "instances"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    records = []
    for i in range(spec.n_images):
        image_id = f"img_{i:04d}"
        rgb, agreement, instances, count = synthesize_image(rng, spec)
        save_rgb(rgb, out / "images" / f"{image_id}.png")
        save_agreement(agreement, out / "agreement" / f"{image_id}.png")
        save_instances(instances, out / "instances" / f"{image_id}.png")
        records.append(
            ManifestRecord(
                image_id=image_id,
                image=f"images/{image_id}.png",
                agreement=f"agreement/{image_id}.png",
                instances=f"instances/{image_id}.png",
                count=count,
            )
        )
    manifest_path = out / "manifest.jsonl"
    write_manifest(records, manifest_path)
    return manifest_path


__all__ = ["SyntheticSpec", "synthesize_image", "generate_synthetic", "PLACEMENT_RETRIES"]
