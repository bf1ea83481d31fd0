"""Rank-colorized overlays of salient instances.

Instances are filled with a fixed 12-entry palette indexed by predicted
rank position (most salient first); the image border is painted blue
when the predicted order matches the ground truth exactly and red
otherwise.  The palette is a constant lookup table so renders are
stable across runs; hex values are documented in the README.
"""

from __future__ import annotations

import numpy as np

from .core import InstanceMap, SaliencyMap
from .ranking import RankVector, instance_rank_scores, rank_order

# colorblind-safe 12-entry table (most to least salient)
RANK_PALETTE = (
    "#882E72",
    "#1965B0",
    "#5289C7",
    "#7BAFDE",
    "#4EB265",
    "#90C987",
    "#CAE0AB",
    "#F7F056",
    "#F6C141",
    "#F1932D",
    "#E8601C",
    "#DC050C",
)
BORDER_CORRECT = "#1965B0"
BORDER_INCORRECT = "#DC050C"


def _hex_to_rgb(code: str) -> tuple[int, int, int]:
    code = code.lstrip("#")
    return tuple(int(code[i : i + 2], 16) for i in (0, 2, 4))


def ranks_match(predicted: RankVector, gt: RankVector) -> bool:
    """Exact agreement of the tie-averaged rank assignments."""
    return all(predicted.rank_of(i) == r for i, r in gt.entries)


def render_rank_overlay(
    saliency: SaliencyMap,
    instances: InstanceMap,
    gt_rank: RankVector,
    border: int = 2,
) -> np.ndarray:
    """(H, W, 3) uint8 image: palette-filled instances over dimmed saliency."""
    predicted = rank_order(instance_rank_scores(saliency, instances))

    h, w = saliency.height, saliency.width
    canvas = np.empty((h, w, 3), dtype=np.uint8)
    gray = np.rint(saliency.values * 127.0).astype(np.uint8)
    canvas[:, :, 0] = gray
    canvas[:, :, 1] = gray
    canvas[:, :, 2] = gray

    # palette position = order of predicted rank value (ties keep id order)
    by_rank = sorted(predicted.entries, key=lambda e: (e[1], e[0]))
    for position, (instance_id, _) in enumerate(by_rank):
        color = _hex_to_rgb(RANK_PALETTE[min(position, len(RANK_PALETTE) - 1)])
        mask = instances.labels == instance_id
        canvas[mask] = color

    border_color = _hex_to_rgb(
        BORDER_CORRECT if ranks_match(predicted, gt_rank) else BORDER_INCORRECT
    )
    b = max(1, min(border, h // 2, w // 2))
    canvas[:b, :] = border_color
    canvas[-b:, :] = border_color
    canvas[:, :b] = border_color
    canvas[:, -b:] = border_color
    return canvas


__all__ = [
    "RANK_PALETTE",
    "BORDER_CORRECT",
    "BORDER_INCORRECT",
    "ranks_match",
    "render_rank_overlay",
]
