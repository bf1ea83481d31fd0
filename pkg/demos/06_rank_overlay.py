"""Rank-colorized overlays: where a predictor gets the order right.

Instances are filled with a fixed palette indexed by predicted rank;
the border says whether the whole predicted order matches the ground
truth (blue) or not (red).
"""

from pathlib import Path

import numpy as np

from salientrank.core import SaliencyMap, normalize_saliency
from salientrank.images import load_agreement, load_instances, save_rgb
from salientrank.manifest import load_manifest
from salientrank.ranking import gt_rank_from_agreement
from salientrank.synthetic import SyntheticSpec, generate_synthetic
from salientrank.visualize import render_rank_overlay

out = Path(__file__).parent / "output" / "06_overlays"
out.mkdir(parents=True, exist_ok=True)

spec = SyntheticSpec(n_images=2, min_instances=3, max_instances=5, seed=33)
manifest = load_manifest(generate_synthetic(spec, out / "data"))
record = manifest.records[0]
agreement = load_agreement(manifest.path(record.agreement))
instances = load_instances(manifest.path(record.instances))
gt_rank = gt_rank_from_agreement(agreement, instances)

# 1. the ground truth evaluated against itself: blue border
perfect = normalize_saliency(agreement)
save_rgb(render_rank_overlay(perfect, instances, gt_rank), out / "perfect.png")

# 2. a predictor that inverts salience: red border
inverted = SaliencyMap(np.where(agreement.values > 0, 1.0 - perfect.values, 0.0))
save_rgb(render_rank_overlay(inverted, instances, gt_rank), out / "inverted.png")

print(f"ground-truth ranks: {dict(gt_rank.entries)}")
print(f"overlays written to {out} (border blue = order correct, red = wrong)")
