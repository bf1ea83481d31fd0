"""Count-class schemes and VOC-style average precision for subitizing.

Images are classified by how many salient objects they contain, with an
open-ended top class ("4+").  Per-class AP is computed one-vs-rest from
confidence rankings, then aggregated as an unweighted mean and as a
count-weighted mean ("overall").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedApError, ValidationError

AP_METHODS = ("voc07", "continuous")


@dataclass(frozen=True)
class CountScheme:
    """Ordered count classes; the last one is open-ended."""

    name: str
    classes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("count classes must be distinct")
        if not self.classes or not self.classes[-1].endswith("+"):
            raise ValidationError("the last count class must be open-ended (e.g. '4+')")

    @property
    def n_classes(self) -> int:
        return len(self.classes)


SOS_SCHEME = CountScheme("sos", ("0", "1", "2", "3", "4+"))
PASCALS_SCHEME = CountScheme("pascals", ("1", "2", "3", "4+"))
_SCHEMES = {s.name: s for s in (SOS_SCHEME, PASCALS_SCHEME)}


def scheme_by_name(name: str) -> CountScheme:
    try:
        return _SCHEMES[name]
    except KeyError:
        raise ValidationError(
            f"unknown count scheme {name!r}; expected one of {sorted(_SCHEMES)}"
        ) from None


def count_to_class(count: int, scheme: CountScheme) -> str:
    """Map an object count to its class label; counts >= 4 collapse to '4+'."""
    if count < 0:
        raise ValidationError(f"object count must be non-negative, got {count}")
    label = "4+" if count >= 4 else str(count)
    if label not in scheme.classes:
        raise ValidationError(
            f"count {count} has no class in scheme {scheme.name!r} ({scheme.classes})"
        )
    return label


@dataclass(frozen=True)
class SubitizingPrediction:
    """One image's per-class confidence scores."""

    image_id: str
    confidences: tuple[float, ...]

    def __post_init__(self):
        if not all(np.isfinite(self.confidences)):
            raise ValidationError(f"{self.image_id}: confidences must be finite")


def average_precision(confidences, positives, method: str = "voc07") -> float:
    """AP of a confidence ranking.

    ``voc07`` is the 11-point interpolated variant; ``continuous`` is the
    area under the raw precision-recall steps.  Items are ranked by
    descending confidence with a stable sort, so the caller's input
    order (by image id in the one-vs-rest protocol) breaks ties.
    """
    if method not in AP_METHODS:
        raise ValidationError(f"unknown AP method {method!r}; expected one of {AP_METHODS}")
    conf = np.asarray(confidences, dtype=np.float64).reshape(-1)
    pos = np.asarray(positives, dtype=bool).reshape(-1)
    if conf.size != pos.size:
        raise ValidationError(
            f"confidences and positives differ in length: {conf.size} vs {pos.size}"
        )
    npos = int(pos.sum())
    if npos == 0:
        raise UndefinedApError("average precision undefined: no positive examples")

    order = np.argsort(-conf, kind="mergesort")
    hits = pos[order]
    tp_cum = np.cumsum(hits)
    precision = tp_cum / np.arange(1, conf.size + 1)
    recall = tp_cum / npos

    if method == "continuous":
        return float(precision[hits].sum() / npos)

    ap = 0.0
    for t in np.arange(0.0, 1.05, 0.1):
        mask = recall >= t
        p = float(precision[mask].max()) if mask.any() else 0.0
        ap += p / 11.0
    return float(ap)


def one_vs_rest_ap(
    predictions: list[SubitizingPrediction],
    gt_class_by_id: dict[str, str],
    scheme: CountScheme,
    method: str = "voc07",
) -> tuple[dict[str, float], dict[str, int]]:
    """Per-class AP and class counts for a labelled prediction set."""
    if not predictions:
        raise ValidationError("no subitizing predictions to evaluate")
    missing = [p.image_id for p in predictions if p.image_id not in gt_class_by_id]
    if missing:
        raise ValidationError(f"no ground-truth class for image ids: {missing[:5]}")
    for p in predictions:
        if len(p.confidences) != scheme.n_classes:
            raise ValidationError(
                f"{p.image_id}: expected {scheme.n_classes} confidences, got {len(p.confidences)}"
            )
    ordered = sorted(predictions, key=lambda p: p.image_id)
    per_class_ap = {}
    class_counts = {}
    for idx, label in enumerate(scheme.classes):
        positives = [gt_class_by_id[p.image_id] == label for p in ordered]
        class_counts[label] = sum(positives)
        if class_counts[label] == 0:
            raise UndefinedApError(f"class {label!r} has no positive images")
        confidences = [p.confidences[idx] for p in ordered]
        per_class_ap[label] = average_precision(confidences, positives, method)
    return per_class_ap, class_counts


@dataclass(frozen=True)
class ApReport:
    """Per-class APs plus the mean and count-weighted aggregates."""

    per_class_ap: dict[str, float]
    class_counts: dict[str, int]
    mean_ap: float
    weighted_ap: float


def subitizing_report(per_class_ap: dict[str, float], class_counts: dict[str, int]) -> ApReport:
    """Aggregate per-class APs into mean AP and count-weighted ("overall") AP."""
    if not per_class_ap:
        raise ValidationError("no per-class APs to aggregate")
    if set(per_class_ap) != set(class_counts):
        raise ValidationError(
            f"AP classes {sorted(per_class_ap)} do not match count classes {sorted(class_counts)}"
        )
    labels = list(per_class_ap)
    aps = np.array([per_class_ap[c] for c in labels], dtype=np.float64)
    counts = np.array([class_counts[c] for c in labels], dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValidationError("class counts sum to zero")
    return ApReport(
        per_class_ap=dict(per_class_ap),
        class_counts=dict(class_counts),
        mean_ap=float(aps.mean()),
        weighted_ap=float((aps * counts).sum() / total),
    )


def class_distribution(counts: dict[str, int]) -> dict[str, float]:
    """Fraction of images per class; fractions sum to 1."""
    if not counts:
        raise ValidationError("empty class counts")
    total = sum(counts.values())
    if total <= 0:
        raise ValidationError("class counts sum to zero")
    return {label: count / total for label, count in counts.items()}


__all__ = [
    "AP_METHODS",
    "CountScheme",
    "SOS_SCHEME",
    "PASCALS_SCHEME",
    "scheme_by_name",
    "count_to_class",
    "SubitizingPrediction",
    "average_precision",
    "one_vs_rest_ap",
    "ApReport",
    "subitizing_report",
    "class_distribution",
]
