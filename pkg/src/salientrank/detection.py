"""Threshold-sweep detection metrics against binary ground-truth slices.

A predicted saliency map is swept over a fixed threshold grid (default:
the 256 8-bit levels, so file-quantized maps reproduce exactly) to build
PR and ROC curves, from which AUC, max/median/average F-measure and MAE
are derived.  Evaluating against a nested stack scores every
non-degenerate slice and reports the best slice per metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryMap, NestedStack, SaliencyMap, require_same_shape
from .errors import DegenerateGroundTruthError, ValidationError

DEFAULT_BETA2 = 0.3
DEFAULT_THRESHOLDS = 256


@dataclass(frozen=True)
class CurvePoint:
    """Confusion counts and rates at one threshold."""

    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    tpr: float
    fpr: float


def threshold_grid(n_thresholds: int = DEFAULT_THRESHOLDS) -> np.ndarray:
    """Evenly spaced thresholds over [0, 1]; 256 gives the 8-bit levels i/255."""
    if n_thresholds < 2:
        raise ValidationError(f"need at least 2 thresholds, got {n_thresholds}")
    return np.arange(n_thresholds, dtype=np.float64) / (n_thresholds - 1)


def is_degenerate(gt: BinaryMap) -> bool:
    """Ground truth with no positives or no negatives has undefined rates."""
    total = int(gt.values.sum())
    return total == 0 or total == gt.values.size


def confusion_sweep(
    pred: SaliencyMap, gt: BinaryMap, n_thresholds: int = DEFAULT_THRESHOLDS
) -> list[CurvePoint]:
    """Confusion counts at every threshold (pixel positive iff pred >= t).

    Degenerate ground truth is flagged by NaN in the undefined rate
    (TPR when there are no positives, FPR when there are no negatives).
    """
    require_same_shape(pred, gt, "prediction and ground truth")
    thresholds = threshold_grid(n_thresholds)
    p = pred.values.reshape(-1)
    g = gt.values.reshape(-1).astype(bool)
    npos = int(g.sum())
    nneg = g.size - npos

    positive = p[None, :] >= thresholds[:, None]
    tp = (positive & g[None, :]).sum(axis=1)
    fp = (positive & ~g[None, :]).sum(axis=1)
    fn = npos - tp
    tn = nneg - fp

    predicted = tp + fp
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 1.0)
        tpr = tp / npos if npos > 0 else np.full_like(thresholds, np.nan)
        fpr = fp / nneg if nneg > 0 else np.full_like(thresholds, np.nan)

    return [
        CurvePoint(
            threshold=float(thresholds[i]),
            tp=int(tp[i]),
            fp=int(fp[i]),
            tn=int(tn[i]),
            fn=int(fn[i]),
            precision=float(precision[i]),
            recall=float(tpr[i]),
            tpr=float(tpr[i]),
            fpr=float(fpr[i]),
        )
        for i in range(thresholds.size)
    ]


def auc(points: list[CurvePoint]) -> float:
    """Area under the ROC curve by trapezoidal integration.

    Endpoints (0, 0) and (1, 1) are appended before integrating so the
    curve always spans the full FPR range.
    """
    if len(points) < 2:
        raise ValidationError("AUC needs at least 2 curve points")
    fpr = np.array([p.fpr for p in points])
    tpr = np.array([p.tpr for p in points])
    if np.isnan(fpr).any() or np.isnan(tpr).any():
        raise DegenerateGroundTruthError(
            "ROC rates undefined: ground truth is all-positive or all-negative"
        )
    fpr = np.concatenate(([0.0, 1.0], fpr))
    tpr = np.concatenate(([0.0, 1.0], tpr))
    order = np.lexsort((tpr, fpr))
    return float(np.trapezoid(tpr[order], fpr[order]))


def f_measure(precision: float, recall: float, beta2: float = DEFAULT_BETA2) -> float:
    """Weighted harmonic mean of precision and recall; 0 when undefined."""
    denom = beta2 * precision + recall
    if denom <= 0.0:
        return 0.0
    return (1.0 + beta2) * precision * recall / denom


def f_measures(
    points: list[CurvePoint], beta2: float = DEFAULT_BETA2
) -> tuple[float, float, float]:
    """(max, median, average) F-measure over the threshold sweep."""
    if beta2 <= 0:
        raise ValidationError(f"beta2 must be positive, got {beta2}")
    if any(math.isnan(p.recall) for p in points):
        raise DegenerateGroundTruthError("F-measure undefined for degenerate ground truth")
    f = np.array([f_measure(p.precision, p.recall, beta2) for p in points])
    return float(f.max()), float(np.median(f)), float(f.mean())


def mae(pred: SaliencyMap, gt: BinaryMap) -> float:
    """Mean absolute pixel difference between prediction and binary truth."""
    require_same_shape(pred, gt, "prediction and ground truth")
    return float(np.mean(np.abs(pred.values - gt.values)))


@dataclass(frozen=True)
class SliceReport:
    """Metrics of one ground-truth slice (agreement level k)."""

    slice_index: int
    auc: float
    max_f: float
    med_f: float
    avg_f: float
    mae: float


@dataclass(frozen=True)
class BestReport:
    """Per-slice metrics plus the best slice for each headline metric."""

    per_slice: tuple[SliceReport, ...]
    degenerate_slices: tuple[int, ...]
    best_auc: tuple[int, float]
    best_maxf: tuple[int, float]
    min_mae: tuple[int, float]


def evaluate_against_stack(
    pred: SaliencyMap,
    stack: NestedStack,
    beta2: float = DEFAULT_BETA2,
    n_thresholds: int = DEFAULT_THRESHOLDS,
) -> BestReport:
    """Score a prediction against every non-degenerate slice of a stack.

    Degenerate slices (all background or all foreground) are reported by
    index and skipped.  Best AUC and best max-F are chosen independently;
    ties resolve to the smallest slice index.
    """
    require_same_shape(pred, stack, "prediction and stack")
    reports: list[SliceReport] = []
    degenerate: list[int] = []
    for k in range(1, stack.n_observers + 1):
        gt = stack.slice(k)
        if is_degenerate(gt):
            degenerate.append(k)
            continue
        points = confusion_sweep(pred, gt, n_thresholds)
        max_f, med_f, avg_f = f_measures(points, beta2)
        reports.append(
            SliceReport(
                slice_index=k,
                auc=auc(points),
                max_f=max_f,
                med_f=med_f,
                avg_f=avg_f,
                mae=mae(pred, gt),
            )
        )
    if not reports:
        raise DegenerateGroundTruthError("every ground-truth slice is degenerate")

    by_auc = max(reports, key=lambda r: r.auc)
    by_maxf = max(reports, key=lambda r: r.max_f)
    by_mae = min(reports, key=lambda r: r.mae)
    return BestReport(
        per_slice=tuple(reports),
        degenerate_slices=tuple(degenerate),
        best_auc=(by_auc.slice_index, by_auc.auc),
        best_maxf=(by_maxf.slice_index, by_maxf.max_f),
        min_mae=(by_mae.slice_index, by_mae.mae),
    )


@dataclass(frozen=True)
class SliceMean:
    """Across-image means for one slice index (Table-style row)."""

    slice_index: int
    n_images: int
    auc: float
    max_f: float
    med_f: float
    avg_f: float
    mae: float


@dataclass(frozen=True)
class DetectionAggregate:
    """Dataset-level detection summary.

    ``mean_best_*`` averages each image's best slice (per metric);
    ``global_best_*`` picks one slice for the whole dataset from the
    per-slice means.  Both readings are reported because benchmarks
    differ on which they use.
    """

    n_images: int
    mean_best_auc: float
    mean_best_maxf: float
    mean_best_medf: float
    mean_best_avgf: float
    mean_min_mae: float
    per_slice: tuple[SliceMean, ...] = field(default_factory=tuple)
    global_best_auc: tuple[int, float] = (0, float("nan"))
    global_best_maxf: tuple[int, float] = (0, float("nan"))
    global_min_mae: tuple[int, float] = (0, float("nan"))


def dataset_detection_report(per_image: list[BestReport]) -> DetectionAggregate:
    """Aggregate per-image best-slice metrics and per-slice means."""
    if not per_image:
        raise ValidationError("cannot aggregate an empty report list")

    mean_best_auc = float(np.mean([r.best_auc[1] for r in per_image]))
    mean_best_maxf = float(np.mean([r.best_maxf[1] for r in per_image]))
    mean_best_medf = float(np.mean([max(s.med_f for s in r.per_slice) for r in per_image]))
    mean_best_avgf = float(np.mean([max(s.avg_f for s in r.per_slice) for r in per_image]))
    mean_min_mae = float(np.mean([r.min_mae[1] for r in per_image]))

    slice_indices = sorted({s.slice_index for r in per_image for s in r.per_slice})
    per_slice = []
    for k in slice_indices:
        rows = [s for r in per_image for s in r.per_slice if s.slice_index == k]
        per_slice.append(
            SliceMean(
                slice_index=k,
                n_images=len(rows),
                auc=float(np.mean([s.auc for s in rows])),
                max_f=float(np.mean([s.max_f for s in rows])),
                med_f=float(np.mean([s.med_f for s in rows])),
                avg_f=float(np.mean([s.avg_f for s in rows])),
                mae=float(np.mean([s.mae for s in rows])),
            )
        )
    best_auc_row = max(per_slice, key=lambda s: s.auc)
    best_maxf_row = max(per_slice, key=lambda s: s.max_f)
    min_mae_row = min(per_slice, key=lambda s: s.mae)
    return DetectionAggregate(
        n_images=len(per_image),
        mean_best_auc=mean_best_auc,
        mean_best_maxf=mean_best_maxf,
        mean_best_medf=mean_best_medf,
        mean_best_avgf=mean_best_avgf,
        mean_min_mae=mean_min_mae,
        per_slice=tuple(per_slice),
        global_best_auc=(best_auc_row.slice_index, best_auc_row.auc),
        global_best_maxf=(best_maxf_row.slice_index, best_maxf_row.max_f),
        global_min_mae=(min_mae_row.slice_index, min_mae_row.mae),
    )


__all__ = [
    "DEFAULT_BETA2",
    "DEFAULT_THRESHOLDS",
    "CurvePoint",
    "SliceReport",
    "BestReport",
    "SliceMean",
    "DetectionAggregate",
    "threshold_grid",
    "is_degenerate",
    "confusion_sweep",
    "auc",
    "f_measure",
    "f_measures",
    "mae",
    "evaluate_against_stack",
    "dataset_detection_report",
]
