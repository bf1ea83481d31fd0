"""End-to-end evaluation: compose stack, detection, ranking and subitizing.

Given a dataset manifest and a directory of predicted saliency maps
(one 8-bit PNG per image id), every image is scored against all
non-degenerate ground-truth slices and its instance rank order is
compared with the agreement-derived order.  When the manifest carries
object counts and the prediction directory contains a subitizing
confidence table, per-class AP is reported as well.  Report files are
bit-reproducible: no timestamps, sorted keys, full-precision floats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .core import build_nested_stack
from .detection import (
    DEFAULT_BETA2,
    DEFAULT_THRESHOLDS,
    BestReport,
    DetectionAggregate,
    CurvePoint,
    dataset_detection_report,
    evaluate_against_stack,
)
from .errors import DataError
from .images import load_agreement, load_instances, load_saliency
from .manifest import DatasetManifest
from .ranking import (
    DatasetSor,
    SorResult,
    dataset_sor,
    gt_rank_from_agreement,
    instance_rank_scores,
    rank_order,
    sor_score,
)
from .subitizing import (
    ApReport,
    SubitizingPrediction,
    count_to_class,
    one_vs_rest_ap,
    scheme_by_name,
    subitizing_report,
)

SUBITIZING_FILE = "subitizing.csv"


@dataclass(frozen=True)
class EvalConfig:
    beta2: float = DEFAULT_BETA2
    n_thresholds: int = DEFAULT_THRESHOLDS
    ap_method: str = "voc07"
    scheme: str = "pascals"
    n_observers: int = 12


@dataclass(frozen=True)
class ImageEvalRow:
    image_id: str
    detection: BestReport
    sor: SorResult
    instance_ids: tuple[int, ...]
    gt_ranks: tuple[float, ...]
    pred_ranks: tuple[float, ...]


@dataclass(frozen=True)
class RunReport:
    version: str
    config: EvalConfig
    n_images: int
    detection: DetectionAggregate
    ranking: DatasetSor
    subitizing: ApReport | None
    rows: tuple[ImageEvalRow, ...]


def _load_subitizing_predictions(pred_dir: Path, scheme) -> list[SubitizingPrediction] | None:
    table = pred_dir / SUBITIZING_FILE
    if not table.is_file():
        return None
    with table.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "image_id" or tuple(header[1:]) != scheme.classes:
            raise DataError(
                f"{table}: header must be image_id,{','.join(scheme.classes)}"
            )
        predictions = []
        for row in reader:
            if not row:
                continue
            if len(row) != 1 + scheme.n_classes:
                raise DataError(f"{table}: bad row {row!r}")
            predictions.append(
                SubitizingPrediction(
                    image_id=row[0],
                    confidences=tuple(float(v) for v in row[1:]),
                )
            )
    if not predictions:
        raise DataError(f"{table} contains no predictions")
    return predictions


def run_eval(manifest: DatasetManifest, pred_dir, config: EvalConfig | None = None) -> RunReport:
    """Evaluate one prediction per manifest image and aggregate the results."""
    config = config or EvalConfig()
    pred_dir = Path(pred_dir)
    rows = []
    for record in sorted(manifest.records, key=lambda r: r.image_id):
        pred_path = pred_dir / f"{record.image_id}.png"
        if not pred_path.is_file():
            raise DataError(f"{record.image_id}: missing prediction {pred_path}")
        pred = load_saliency(pred_path)
        agreement = load_agreement(manifest.path(record.agreement), config.n_observers)
        instances = load_instances(manifest.path(record.instances))

        stack = build_nested_stack(agreement)
        detection = evaluate_against_stack(pred, stack, config.beta2, config.n_thresholds)

        gt_rank = gt_rank_from_agreement(agreement, instances)
        pred_rank = rank_order(instance_rank_scores(pred, instances))
        sor = sor_score(gt_rank, pred_rank)

        rows.append(
            ImageEvalRow(
                image_id=record.image_id,
                detection=detection,
                sor=sor,
                instance_ids=gt_rank.ids,
                gt_ranks=tuple(r for _, r in gt_rank.entries),
                pred_ranks=tuple(pred_rank.rank_of(i) for i in gt_rank.ids),
            )
        )

    subitizing = None
    scheme = scheme_by_name(config.scheme)
    predictions = _load_subitizing_predictions(pred_dir, scheme)
    if predictions is not None:
        if not manifest.has_counts:
            raise DataError(
                "subitizing predictions found but the manifest has no object counts"
            )
        gt_class = {
            r.image_id: count_to_class(r.count, scheme) for r in manifest.records
        }
        per_class, counts = one_vs_rest_ap(predictions, gt_class, scheme, config.ap_method)
        subitizing = subitizing_report(per_class, counts)

    sors = [r.sor for r in rows]
    if any(s.valid for s in sors):
        ranking = dataset_sor(sors)
    else:
        # e.g. constant predictions: every image ties, SOR undefined everywhere
        ranking = DatasetSor(mean_sor=float("nan"), n_valid=0, n_excluded=len(rows))

    return RunReport(
        version=__version__,
        config=config,
        n_images=len(rows),
        detection=dataset_detection_report([r.detection for r in rows]),
        ranking=ranking,
        subitizing=subitizing,
        rows=tuple(rows),
    )


def _row_dict(row: ImageEvalRow) -> dict:
    return {
        "image_id": row.image_id,
        "instance_ids": list(row.instance_ids),
        "gt_ranks": list(row.gt_ranks),
        "pred_ranks": list(row.pred_ranks),
        "rho": None if not row.sor.valid else row.sor.rho,
        "sor": None if not row.sor.valid else row.sor.sor,
        "sor_valid": row.sor.valid,
        "n_instances": row.sor.n_instances,
        "best_auc": {"slice": row.detection.best_auc[0], "value": row.detection.best_auc[1]},
        "best_maxf": {"slice": row.detection.best_maxf[0], "value": row.detection.best_maxf[1]},
        "min_mae": {"slice": row.detection.min_mae[0], "value": row.detection.min_mae[1]},
        "degenerate_slices": list(row.detection.degenerate_slices),
        "per_slice": [
            {
                "slice": s.slice_index,
                "auc": s.auc,
                "max_f": s.max_f,
                "med_f": s.med_f,
                "avg_f": s.avg_f,
                "mae": s.mae,
            }
            for s in row.detection.per_slice
        ],
    }


def report_to_dict(report: RunReport) -> dict:
    det = report.detection
    out = {
        "version": report.version,
        "config": {
            "beta2": report.config.beta2,
            "n_thresholds": report.config.n_thresholds,
            "ap_method": report.config.ap_method,
            "scheme": report.config.scheme,
            "n_observers": report.config.n_observers,
        },
        "n_images": report.n_images,
        "detection": {
            "mean_best_auc": det.mean_best_auc,
            "mean_best_maxf": det.mean_best_maxf,
            "mean_best_medf": det.mean_best_medf,
            "mean_best_avgf": det.mean_best_avgf,
            "mean_min_mae": det.mean_min_mae,
            "global_best_auc": {"slice": det.global_best_auc[0], "value": det.global_best_auc[1]},
            "global_best_maxf": {"slice": det.global_best_maxf[0], "value": det.global_best_maxf[1]},
            "global_min_mae": {"slice": det.global_min_mae[0], "value": det.global_min_mae[1]},
            "per_slice_mean": [
                {
                    "slice": s.slice_index,
                    "n_images": s.n_images,
                    "auc": s.auc,
                    "max_f": s.max_f,
                    "med_f": s.med_f,
                    "avg_f": s.avg_f,
                    "mae": s.mae,
                }
                for s in det.per_slice
            ],
        },
        "ranking": {
            "mean_sor": report.ranking.mean_sor if report.ranking.n_valid > 0 else None,
            "n_valid": report.ranking.n_valid,
            "n_excluded": report.ranking.n_excluded,
        },
        "subitizing": None,
        "per_image": [_row_dict(r) for r in report.rows],
    }
    if report.subitizing is not None:
        out["subitizing"] = {
            "per_class_ap": dict(report.subitizing.per_class_ap),
            "class_counts": dict(report.subitizing.class_counts),
            "mean_ap": report.subitizing.mean_ap,
            "weighted_ap": report.subitizing.weighted_ap,
        }
    return out


def report_to_json(report: RunReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def write_ranking_csv(report: RunReport, path) -> None:
    """Per-image ranking rows: ids and ranks are ';'-joined lists."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["image_id", "instance_ids", "gt_ranks", "pred_ranks", "rho", "sor", "valid"]
        )
        for row in report.rows:
            writer.writerow(
                [
                    row.image_id,
                    ";".join(str(i) for i in row.instance_ids),
                    ";".join(repr(r) for r in row.gt_ranks),
                    ";".join(repr(r) for r in row.pred_ranks),
                    repr(row.sor.rho) if row.sor.valid else "",
                    repr(row.sor.sor) if row.sor.valid else "",
                    int(row.sor.valid),
                ]
            )


def write_detection_csv(report: RunReport, path) -> None:
    """One row per image per non-degenerate slice."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "slice", "auc", "max_f", "med_f", "avg_f", "mae"])
        for row in report.rows:
            for s in row.detection.per_slice:
                writer.writerow(
                    [
                        row.image_id,
                        s.slice_index,
                        repr(s.auc),
                        repr(s.max_f),
                        repr(s.med_f),
                        repr(s.avg_f),
                        repr(s.mae),
                    ]
                )


def write_curve_csv(points: list[CurvePoint], path) -> None:
    """Dump one threshold sweep for plotting."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["threshold", "tp", "fp", "tn", "fn", "precision", "recall", "tpr", "fpr"]
        )
        for p in points:
            writer.writerow(
                [
                    repr(p.threshold),
                    p.tp,
                    p.fp,
                    p.tn,
                    p.fn,
                    repr(p.precision),
                    repr(p.recall),
                    repr(p.tpr),
                    repr(p.fpr),
                ]
            )


def write_subitizing_csv(report: ApReport, path) -> None:
    """Per-class AP rows plus the mean / weighted aggregate rows."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "count", "ap"])
        for label, ap in report.per_class_ap.items():
            writer.writerow([label, report.class_counts[label], repr(ap)])
        writer.writerow(["mean", "", repr(report.mean_ap)])
        writer.writerow(["overall", "", repr(report.weighted_ap)])


__all__ = [
    "SUBITIZING_FILE",
    "EvalConfig",
    "ImageEvalRow",
    "RunReport",
    "run_eval",
    "report_to_dict",
    "report_to_json",
    "write_ranking_csv",
    "write_detection_csv",
    "write_curve_csv",
    "write_subitizing_csv",
]
