import csv

import numpy as np
import pytest

from salientrank.core import SaliencyMap, build_nested_stack, normalize_saliency
from salientrank.detection import evaluate_against_stack
from salientrank.errors import DataError
from salientrank.evaluate import (
    EvalConfig,
    report_to_dict,
    report_to_json,
    run_eval,
    write_detection_csv,
    write_ranking_csv,
)
from salientrank.images import load_agreement, load_instances, save_saliency
from salientrank.manifest import load_manifest
from salientrank.ranking import gt_rank_from_agreement, instance_rank_scores, rank_order, sor_score
from salientrank.subitizing import count_to_class, scheme_by_name
from salientrank.synthetic import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    spec = SyntheticSpec(canvas=32, n_images=4, min_instances=2, max_instances=4, seed=9)
    manifest = load_manifest(generate_synthetic(spec, root))
    return manifest


def write_gt_predictions(manifest, out):
    out.mkdir(exist_ok=True)
    for record in manifest.records:
        agreement = load_agreement(manifest.path(record.agreement))
        save_saliency(normalize_saliency(agreement), out / f"{record.image_id}.png")
    return out


def test_self_evaluation_is_perfect(dataset, tmp_path):
    preds = write_gt_predictions(dataset, tmp_path / "preds")
    report = run_eval(dataset, preds)
    assert report.ranking.mean_sor == 1.0
    assert report.ranking.n_excluded == 0
    for row in report.rows:
        for s in row.detection.per_slice:
            assert s.auc == pytest.approx(1.0, abs=1e-9)


def test_constant_predictions(dataset, tmp_path):
    preds = tmp_path / "preds"
    preds.mkdir()
    for record in dataset.records:
        size = load_agreement(dataset.path(record.agreement)).values.shape
        save_saliency(SaliencyMap(np.full(size, 128 / 255)), preds / f"{record.image_id}.png")
    report = run_eval(dataset, preds)
    assert report.ranking.n_valid == 0
    assert report.ranking.n_excluded == report.n_images
    for row in report.rows:
        for s in row.detection.per_slice:
            assert s.auc == pytest.approx(0.5, abs=1e-12)
    # json stays well-formed with SOR undefined
    assert '"mean_sor": null' in report_to_json(report)


def test_report_matches_module_by_module_recompute(dataset, tmp_path):
    rng = np.random.Generator(np.random.PCG64(42))
    preds = tmp_path / "preds"
    preds.mkdir()
    for record in dataset.records:
        size = load_agreement(dataset.path(record.agreement)).values.shape
        save_saliency(
            SaliencyMap(rng.integers(0, 256, size=size) / 255.0),
            preds / f"{record.image_id}.png",
        )
    config = EvalConfig()
    report = run_eval(dataset, preds, config)

    from salientrank.images import load_saliency

    sors, aucs = [], []
    for record in sorted(dataset.records, key=lambda r: r.image_id):
        pred = load_saliency(preds / f"{record.image_id}.png")
        agreement = load_agreement(dataset.path(record.agreement))
        instances = load_instances(dataset.path(record.instances))
        det = evaluate_against_stack(pred, build_nested_stack(agreement))
        gt = gt_rank_from_agreement(agreement, instances)
        pr = rank_order(instance_rank_scores(pred, instances))
        sors.append(sor_score(gt, pr))
        aucs.append(det.best_auc[1])
    valid = [s.sor for s in sors if s.valid]
    assert report.ranking.mean_sor == pytest.approx(float(np.mean(valid)), rel=1e-12)
    assert report.detection.mean_best_auc == pytest.approx(float(np.mean(aucs)), rel=1e-12)


def test_aggregates_trace_to_rows(dataset, tmp_path):
    preds = write_gt_predictions(dataset, tmp_path / "preds")
    report = run_eval(dataset, preds)
    payload = report_to_dict(report)
    best_aucs = [row["best_auc"]["value"] for row in payload["per_image"]]
    assert payload["detection"]["mean_best_auc"] == pytest.approx(
        sum(best_aucs) / len(best_aucs), rel=1e-12
    )
    sors = [row["sor"] for row in payload["per_image"] if row["sor_valid"]]
    assert payload["ranking"]["mean_sor"] == pytest.approx(sum(sors) / len(sors), rel=1e-12)


def test_missing_prediction_errors(dataset, tmp_path):
    empty = tmp_path / "nothing"
    empty.mkdir()
    with pytest.raises(DataError, match="missing prediction"):
        run_eval(dataset, empty)


def test_report_json_is_reproducible(dataset, tmp_path):
    preds = write_gt_predictions(dataset, tmp_path / "preds")
    a = report_to_json(run_eval(dataset, preds))
    b = report_to_json(run_eval(dataset, preds))
    assert a == b


def test_csv_writers_produce_expected_rows(dataset, tmp_path):
    preds = write_gt_predictions(dataset, tmp_path / "preds")
    report = run_eval(dataset, preds)
    rank_csv = tmp_path / "rank.csv"
    det_csv = tmp_path / "det.csv"
    write_ranking_csv(report, rank_csv)
    write_detection_csv(report, det_csv)
    with rank_csv.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["image_id", "instance_ids", "gt_ranks", "pred_ranks", "rho", "sor", "valid"]
    assert len(rows) == 1 + report.n_images
    with det_csv.open() as fh:
        rows = list(csv.reader(fh))
    n_slice_rows = sum(len(r.detection.per_slice) for r in report.rows)
    assert len(rows) == 1 + n_slice_rows


def test_subitizing_predictions_join_the_report(tmp_path):
    # seed 1 yields counts covering every Pascal-S class: 1, 2, 3 and 4+
    spec = SyntheticSpec(canvas=32, n_images=8, min_instances=1, max_instances=6, seed=1)
    manifest = load_manifest(generate_synthetic(spec, tmp_path / "data"))
    preds = write_gt_predictions(manifest, tmp_path / "preds")
    scheme = scheme_by_name("pascals")
    # perfect one-hot confidences from the ground-truth counts
    with (preds / "subitizing.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id"] + list(scheme.classes))
        for record in manifest.records:
            label = count_to_class(record.count, scheme)
            onehot = [1.0 if c == label else 0.0 for c in scheme.classes]
            writer.writerow([record.image_id] + onehot)
    report = run_eval(manifest, preds)
    assert report.subitizing is not None
    for ap in report.subitizing.per_class_ap.values():
        assert ap == pytest.approx(1.0)
    assert report.subitizing.weighted_ap == pytest.approx(1.0)
