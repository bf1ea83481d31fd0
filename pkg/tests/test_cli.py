import csv

import numpy as np
import pytest

from salientrank.cli import main
from salientrank.core import AgreementMap, normalize_saliency
from salientrank.images import load_binary, save_agreement, save_saliency
from salientrank.manifest import load_manifest


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    code = main(
        [
            "gen-synthetic",
            "--out-dir", str(root),
            "--seed", "3",
            "--num-images", "3",
            "--size", "32",
            "--min-instances", "2",
            "--max-instances", "4",
        ]
    )
    assert code == 0
    return root


@pytest.fixture(scope="module")
def gt_pred_dir(dataset_dir, tmp_path_factory):
    preds = tmp_path_factory.mktemp("cli_preds")
    manifest = load_manifest(dataset_dir / "manifest.jsonl")
    from salientrank.images import load_agreement

    for record in manifest.records:
        agreement = load_agreement(manifest.path(record.agreement))
        save_saliency(normalize_saliency(agreement), preds / f"{record.image_id}.png")
    return preds


def test_no_args_is_usage_error(capsys):
    assert main([]) == 1


def test_unknown_subcommand_is_usage_error():
    assert main(["frobnicate"]) == 1


def test_unknown_flag_is_usage_error():
    assert main(["gen-synthetic", "--no-such-flag"]) == 1


def test_missing_manifest_is_data_error(tmp_path, capsys):
    code = main(["eval-rank", "--manifest", str(tmp_path / "no.jsonl"), "--pred-dir", str(tmp_path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_build_stack(tmp_path):
    agreement = AgreementMap(np.array([[0, 5], [12, 3]]), 12)
    save_agreement(agreement, tmp_path / "a.png")
    out = tmp_path / "slices"
    assert main(["build-stack", "--agreement", str(tmp_path / "a.png"), "--out-dir", str(out)]) == 0
    slices = sorted(out.glob("slice_*.png"))
    assert len(slices) == 12
    assert load_binary(slices[0]).values.sum() == 3  # three nonzero pixels at k=1


def test_eval_rank_self_evaluation(dataset_dir, gt_pred_dir, tmp_path, capsys):
    out = tmp_path / "rank.json"
    code = main(
        [
            "eval-rank",
            "--manifest", str(dataset_dir / "manifest.jsonl"),
            "--pred-dir", str(gt_pred_dir),
            "--out", str(out),
        ]
    )
    assert code == 0
    captured = capsys.readouterr().out
    assert "SOR 1.0000" in captured
    assert out.is_file()


def test_eval_detect_writes_csv(dataset_dir, gt_pred_dir, tmp_path, capsys):
    out = tmp_path / "det.csv"
    curves = tmp_path / "curves"
    code = main(
        [
            "eval-detect",
            "--manifest", str(dataset_dir / "manifest.jsonl"),
            "--pred-dir", str(gt_pred_dir),
            "--out", str(out),
            "--format", "csv",
            "--curves-dir", str(curves),
        ]
    )
    assert code == 0
    assert "AUC 1.0000" in capsys.readouterr().out
    with out.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "image_id"
    assert len(rows) > 1
    dumped = sorted(curves.glob("*.csv"))
    assert len(dumped) == 3
    with dumped[0].open() as fh:
        header = next(csv.reader(fh))
    assert header == ["threshold", "tp", "fp", "tn", "fn", "precision", "recall", "tpr", "fpr"]


def test_eval_subitize(tmp_path, capsys):
    gt = tmp_path / "gt.csv"
    pred = tmp_path / "pred.csv"
    with gt.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "count"])
        for i, count in enumerate([1, 2, 3, 5]):
            writer.writerow([f"im{i}", count])
    with pred.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "1", "2", "3", "4+"])
        onehots = {1: 0, 2: 1, 3: 2, 5: 3}
        for i, count in enumerate([1, 2, 3, 5]):
            row = [0.0] * 4
            row[onehots[count]] = 1.0
            writer.writerow([f"im{i}"] + row)
    code = main(
        [
            "eval-subitize",
            "--gt-csv", str(gt),
            "--pred", str(pred),
            "--scheme", "pascals",
            "--out", str(tmp_path / "ap.json"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "mean AP 1.0000" in out
    assert (tmp_path / "ap.json").is_file()


def test_train_infer_pca_rank_vis_pipeline(dataset_dir, tmp_path, capsys):
    ckpt = tmp_path / "model.npz"
    log = tmp_path / "loss.csv"
    manifest = str(dataset_dir / "manifest.jsonl")
    code = main(
        [
            "train-toy",
            "--manifest", manifest,
            "--seed", "5",
            "--epochs", "3",
            "--checkpoint", str(ckpt),
            "--log", str(log),
        ]
    )
    assert code == 0
    first = capsys.readouterr().out
    assert "final loss" in first
    assert ckpt.is_file() and log.is_file()

    # identical seeds print identical loss lines
    code = main(
        ["train-toy", "--manifest", manifest, "--seed", "5", "--epochs", "3"]
    )
    assert code == 0
    second = capsys.readouterr().out
    assert first.splitlines()[0] == second.splitlines()[0]

    preds = tmp_path / "preds"
    assert main(["infer", "--checkpoint", str(ckpt), "--manifest", manifest, "--out-dir", str(preds)]) == 0
    capsys.readouterr()
    assert len(list(preds.glob("*.png"))) == 3

    records = load_manifest(dataset_dir / "manifest.jsonl").records
    image_path = load_manifest(dataset_dir / "manifest.jsonl").path(records[0].image)
    assert main(
        ["pca-vis", "--checkpoint", str(ckpt), "--image", str(image_path), "--out", str(tmp_path / "pca.png")]
    ) == 0
    capsys.readouterr()
    assert (tmp_path / "pca.png").is_file()

    assert main(
        [
            "rank-vis",
            "--manifest", manifest,
            "--pred-dir", str(preds),
            "--image-id", records[0].image_id,
            "--out", str(tmp_path / "overlay.png"),
        ]
    ) == 0
    capsys.readouterr()
    assert (tmp_path / "overlay.png").is_file()


def test_infer_single_image(dataset_dir, tmp_path, capsys):
    manifest = load_manifest(dataset_dir / "manifest.jsonl")
    ckpt = tmp_path / "m.npz"
    assert main(
        ["train-toy", "--manifest", str(dataset_dir / "manifest.jsonl"), "--epochs", "1",
         "--checkpoint", str(ckpt)]
    ) == 0
    capsys.readouterr()
    image = manifest.path(manifest.records[0].image)
    out = tmp_path / "sal.png"
    assert main(["infer", "--checkpoint", str(ckpt), "--image", str(image), "--out", str(out)]) == 0
    assert out.is_file()
    # missing --out is a data error
    assert main(["infer", "--checkpoint", str(ckpt), "--image", str(image)]) == 2
