"""Subitizing: count-class mapping and average-precision aggregation.

Counting salient objects is scored as one-vs-rest classification over
count classes with an open-ended top bucket.  Per-class AP comes from
the confidence ranking (11-point interpolated by default); the summary
reports the plain mean and the count-weighted "overall" AP, which can
differ a lot on imbalanced data.
"""

import numpy as np

from salientrank.subitizing import (
    PASCALS_SCHEME,
    SOS_SCHEME,
    SubitizingPrediction,
    average_precision,
    class_distribution,
    count_to_class,
    one_vs_rest_ap,
    subitizing_report,
)

# Counts collapse into classes; anything >= 4 lands in the open bucket.
for count in (0, 1, 3, 4, 9):
    print(f"count {count}: SOS class {count_to_class(count, SOS_SCHEME)!r}")

# The two AP variants on a small ranking.
conf = [0.9, 0.8, 0.6, 0.4, 0.2]
pos = [True, False, True, False, True]
print(f"\nvoc07 AP      {average_precision(conf, pos, 'voc07'):.4f}")
print(f"continuous AP {average_precision(conf, pos, 'continuous'):.4f}")

# Aggregate arithmetic: weighted AP follows the class sizes.
per_class = {"0": 0.95, "1": 0.92, "2": 0.61, "3": 0.59, "4+": 0.67}
counts = {"0": 338, "1": 617, "2": 219, "3": 137, "4+": 69}
report = subitizing_report(per_class, counts)
print(f"\nmean AP {report.mean_ap:.3f}  weighted (overall) AP {report.weighted_ap:.3f}")
dist = class_distribution(counts)
print("class shares:", {k: round(v, 2) for k, v in dist.items()})

# One-vs-rest protocol end to end on synthetic confidences.
rng = np.random.Generator(np.random.PCG64(5))
gt_class = {}
predictions = []
for i in range(40):
    image_id = f"im{i:02d}"
    true_class = PASCALS_SCHEME.classes[int(rng.integers(0, 4))]
    gt_class[image_id] = true_class
    noise = rng.normal(0, 0.35, size=4)
    confidences = [
        1.0 + noise[j] if c == true_class else noise[j]
        for j, c in enumerate(PASCALS_SCHEME.classes)
    ]
    predictions.append(SubitizingPrediction(image_id, tuple(confidences)))
per_class, class_counts = one_vs_rest_ap(predictions, gt_class, PASCALS_SCHEME)
noisy = subitizing_report(per_class, class_counts)
print(f"\nnoisy synthetic predictor: per-class "
      f"{ {k: round(v, 2) for k, v in noisy.per_class_ap.items()} }")
print(f"mean {noisy.mean_ap:.3f}  overall {noisy.weighted_ap:.3f}")
