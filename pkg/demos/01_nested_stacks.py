"""Agreement maps and their nested stack representation.

An agreement map records, per pixel, how many of N observers marked the
pixel as salient.  Expanding it into N binary slices ("at least i
observers agree") keeps every level of consensus addressable at once:
slice 1 is the union of everything anyone marked, slice N the pixels of
full consensus, and the slices sum back to the original counts.
"""

from pathlib import Path

import numpy as np

from salientrank.core import (
    AgreementMap,
    build_nested_stack,
    collapse_stack,
    normalize_saliency,
    threshold_agreement,
)
from salientrank.images import save_binary, save_saliency

out = Path(__file__).parent / "output" / "01_nested_stacks"
out.mkdir(parents=True, exist_ok=True)

# A toy scene: two rectangles with different observer support.
values = np.zeros((24, 32), dtype=int)
values[4:12, 4:14] = 11   # almost everyone agrees on this object
values[14:21, 18:28] = 4  # a minority marks this one
agreement = AgreementMap(values, n_observers=12)

stack = build_nested_stack(agreement)
print(f"agreement {agreement.height}x{agreement.width}, N={agreement.n_observers}")
for k in (1, 4, 5, 11, 12):
    positives = int(stack.slices[k - 1].sum())
    print(f"  slice {k:2d} ('at least {k} observers'): {positives} positive pixels")

# The slices are nested and recover the counts exactly.
assert (stack.slices[1:] <= stack.slices[:-1]).all()
roundtrip = collapse_stack(stack)
assert (roundtrip.values == agreement.values).all()
print("nesting holds and collapse(build(A)) == A")

# Thresholding at level k is the same thing as picking slice k.
for k in (1, 5, 12):
    assert (threshold_agreement(agreement, k).values == stack.slices[k - 1]).all()

# Save a few slices plus the normalized [0, 1] view.
for k in (1, 4, 11):
    save_binary(stack.slice(k), out / f"slice_{k:02d}.png")
save_saliency(normalize_saliency(agreement), out / "normalized.png")
print(f"wrote slice and saliency images to {out}")
