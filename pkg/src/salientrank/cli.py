"""Command-line harness.

Subcommands: build-stack, eval-detect, eval-rank, eval-subitize,
gen-synthetic, train-toy, infer, pca-vis, rank-vis.  Exit codes:
0 success, 1 usage error, 2 data/validation error.  Numbers printed to
stdout use 4 decimals; report files keep full precision.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .core import SaliencyMap, build_nested_stack, normalize_saliency
from .errors import DataError, SalienceError
from .evaluate import (
    EvalConfig,
    report_to_json,
    run_eval,
    write_detection_csv,
    write_ranking_csv,
    write_subitizing_csv,
)
from .images import (
    load_agreement,
    load_instances,
    load_rgb,
    load_saliency,
    save_binary,
    save_rgb,
    save_saliency,
)
from .manifest import load_manifest
from .net import (
    NetConfig,
    TrainConfig,
    TrainSample,
    infer_nrss,
    infer_saliency,
    load_checkpoint,
    pca_visualize,
    save_checkpoint,
    train,
)
from .ranking import gt_rank_from_agreement
from .subitizing import (
    SubitizingPrediction,
    count_to_class,
    one_vs_rest_ap,
    scheme_by_name,
    subitizing_report,
)
from .synthetic import SyntheticSpec, generate_synthetic
from .visualize import render_rank_overlay


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="salientrank", description=__doc__)
    parser.add_argument("--version", action="version", version=f"salientrank {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build-stack", help="expand an agreement map into nested binary slices")
    p.add_argument("--agreement", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-observers", type=int, default=12)

    for name in ("eval-detect", "eval-rank"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} evaluation over a manifest")
        p.add_argument("--manifest", required=True)
        p.add_argument("--pred-dir", required=True)
        p.add_argument("--beta2", type=float, default=0.3)
        p.add_argument("--thresholds", type=int, default=256)
        p.add_argument("--ap-method", choices=("voc07", "continuous"), default="voc07")
        p.add_argument("--scheme", choices=("sos", "pascals"), default="pascals")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="json")
        if name == "eval-detect":
            p.add_argument(
                "--curves-dir",
                default=None,
                help="dump each image's best-AUC-slice sweep as CSV here",
            )

    p = sub.add_parser("eval-subitize", help="average precision of count predictions")
    p.add_argument("--pred", required=True, help="CSV: image_id plus one confidence per class")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--gt-csv", help="CSV with image_id,count rows")
    group.add_argument("--manifest", help="manifest whose records carry counts")
    p.add_argument("--scheme", choices=("sos", "pascals"), default="pascals")
    p.add_argument("--ap-method", choices=("voc07", "continuous"), default="voc07")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-images", type=int, default=10)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--min-instances", type=int, default=1)
    p.add_argument("--max-instances", type=int, default=8)

    p = sub.add_parser("train-toy", help="train the toy network on a manifest dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--stages", type=int, default=4)
    p.add_argument("--gt-scale", type=float, default=1.0)
    p.add_argument("--atrous", action="store_true")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--log", default=None, help="per-epoch loss CSV")

    p = sub.add_parser("infer", help="predict saliency maps with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--out-dir", default=None)

    p = sub.add_parser("pca-vis", help="RGB view of the predicted stack's top components")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("rank-vis", help="rank-colorized instance overlay")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--image-id", required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_build_stack(args) -> int:
    agreement = load_agreement(args.agreement, args.n_observers)
    stack = build_nested_stack(agreement)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(1, stack.n_observers + 1):
        mask = stack.slice(k)
        save_binary(mask, out / f"slice_{k:02d}.png")
        print(f"slice {k:2d}: {int(mask.values.sum())} positive pixels")
    print(f"wrote {stack.n_observers} slices to {out}")
    return 0


def _eval_config(args) -> EvalConfig:
    return EvalConfig(
        beta2=args.beta2,
        n_thresholds=args.thresholds,
        ap_method=args.ap_method,
        scheme=args.scheme,
    )


def _dump_best_curves(manifest, pred_dir, report, curves_dir, n_thresholds) -> None:
    from .core import build_nested_stack
    from .detection import confusion_sweep
    from .evaluate import write_curve_csv

    curves_dir.mkdir(parents=True, exist_ok=True)
    by_id = {r.image_id: r for r in manifest.records}
    for row in report.rows:
        record = by_id[row.image_id]
        pred = load_saliency(pred_dir / f"{record.image_id}.png")
        agreement = load_agreement(manifest.path(record.agreement))
        k = row.detection.best_auc[0]
        points = confusion_sweep(pred, build_nested_stack(agreement).slice(k), n_thresholds)
        write_curve_csv(points, curves_dir / f"{row.image_id}_slice{k:02d}.csv")


def _write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _cmd_eval_detect(args) -> int:
    manifest = load_manifest(args.manifest)
    report = run_eval(manifest, args.pred_dir, _eval_config(args))
    det = report.detection
    print(
        f"AUC {det.mean_best_auc:.4f}  maxF {det.mean_best_maxf:.4f}  "
        f"medF {det.mean_best_medf:.4f}  avgF {det.mean_best_avgf:.4f}  "
        f"MAE {det.mean_min_mae:.4f}  ({report.n_images} images)"
    )
    if args.curves_dir:
        _dump_best_curves(manifest, Path(args.pred_dir), report, Path(args.curves_dir), args.thresholds)
        print(f"curve dumps written to {args.curves_dir}")
    if args.out:
        if args.format == "json":
            _write_text(args.out, report_to_json(report))
        else:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            write_detection_csv(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_eval_rank(args) -> int:
    report = run_eval(load_manifest(args.manifest), args.pred_dir, _eval_config(args))
    r = report.ranking
    if r.n_valid > 0:
        print(f"SOR {r.mean_sor:.4f}  ({r.n_valid} valid, {r.n_excluded} excluded)")
    else:
        print(f"SOR undefined  (0 valid, {r.n_excluded} excluded)")
    if args.out:
        if args.format == "json":
            _write_text(args.out, report_to_json(report))
        else:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            write_ranking_csv(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _read_counts_csv(path) -> dict[str, int]:
    counts = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["image_id", "count"]:
            raise DataError(f"{path}: header must be image_id,count")
        for row in reader:
            if not row:
                continue
            counts[row[0]] = int(row[1])
    if not counts:
        raise DataError(f"{path} contains no rows")
    return counts


def _read_confidence_csv(path, scheme) -> list[SubitizingPrediction]:
    predictions = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "image_id" or tuple(header[1:]) != scheme.classes:
            raise DataError(f"{path}: header must be image_id,{','.join(scheme.classes)}")
        for row in reader:
            if not row:
                continue
            predictions.append(
                SubitizingPrediction(row[0], tuple(float(v) for v in row[1:]))
            )
    if not predictions:
        raise DataError(f"{path} contains no predictions")
    return predictions


def _cmd_eval_subitize(args) -> int:
    scheme = scheme_by_name(args.scheme)
    if args.manifest:
        manifest = load_manifest(args.manifest)
        if not manifest.has_counts:
            raise DataError("manifest records carry no object counts")
        counts = {r.image_id: r.count for r in manifest.records}
    else:
        counts = _read_counts_csv(args.gt_csv)
    gt_class = {image_id: count_to_class(c, scheme) for image_id, c in counts.items()}
    predictions = _read_confidence_csv(args.pred, scheme)
    per_class, class_counts = one_vs_rest_ap(predictions, gt_class, scheme, args.ap_method)
    report = subitizing_report(per_class, class_counts)
    for label in scheme.classes:
        print(f"AP[{label}] {report.per_class_ap[label]:.4f}  (n={report.class_counts[label]})")
    print(f"mean AP {report.mean_ap:.4f}  overall AP {report.weighted_ap:.4f}")
    if args.out:
        if args.format == "json":
            import json

            payload = {
                "version": __version__,
                "ap_method": args.ap_method,
                "scheme": scheme.name,
                "per_class_ap": report.per_class_ap,
                "class_counts": report.class_counts,
                "mean_ap": report.mean_ap,
                "weighted_ap": report.weighted_ap,
            }
            _write_text(args.out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
        else:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            write_subitizing_csv(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(
        canvas=args.size,
        n_images=args.num_images,
        min_instances=args.min_instances,
        max_instances=args.max_instances,
        seed=args.seed,
    )
    manifest = generate_synthetic(spec, args.out_dir)
    print(f"wrote {spec.n_images} images; manifest at {manifest}")
    return 0


def _load_train_samples(manifest) -> list[TrainSample]:
    samples = []
    for record in sorted(manifest.records, key=lambda r: r.image_id):
        image = load_rgb(manifest.path(record.image))
        agreement = load_agreement(manifest.path(record.agreement))
        samples.append(
            TrainSample(
                image=image,
                stack=build_nested_stack(agreement),
                saliency=normalize_saliency(agreement),
            )
        )
    return samples


def _cmd_train_toy(args) -> int:
    manifest = load_manifest(args.manifest)
    samples = _load_train_samples(manifest)
    config = TrainConfig(
        net=NetConfig(stages=args.stages, atrous=args.atrous),
        learning_rate=args.lr,
        optimizer=args.optimizer,
        epochs=args.epochs,
        batch_size=args.batch_size,
        gt_scale=args.gt_scale,
        seed=args.seed,
    )
    result = train(samples, config)
    print(
        f"initial loss {result.trajectory[0]:.4f}  final loss {result.trajectory[-1]:.4f}  "
        f"({config.epochs} epochs, {len(samples)} images)"
    )
    if args.checkpoint:
        Path(args.checkpoint).parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(result.params, args.checkpoint)
        print(f"checkpoint written to {args.checkpoint}")
    if args.log:
        Path(args.log).parent.mkdir(parents=True, exist_ok=True)
        keys = [k for k in result.history[0] if k != "epoch"]
        with Path(args.log).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch"] + keys)
            for row in result.history:
                writer.writerow([int(row["epoch"])] + [repr(row[k]) for k in keys])
        print(f"loss log written to {args.log}")
    return 0


def _cmd_infer(args) -> int:
    params = load_checkpoint(args.checkpoint)
    if args.image:
        if not args.out:
            raise DataError("--image requires --out")
        values = infer_saliency(load_rgb(args.image), params)
        save_saliency(SaliencyMap(values), args.out)
        print(f"saliency written to {args.out}")
        return 0
    if args.manifest and args.out_dir:
        manifest = load_manifest(args.manifest)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for record in sorted(manifest.records, key=lambda r: r.image_id):
            values = infer_saliency(load_rgb(manifest.path(record.image)), params)
            save_saliency(SaliencyMap(values), out / f"{record.image_id}.png")
        print(f"{len(manifest)} predictions written to {out}")
        return 0
    raise DataError("infer needs either --image/--out or --manifest/--out-dir")


def _cmd_pca_vis(args) -> int:
    params = load_checkpoint(args.checkpoint)
    stack = infer_nrss(load_rgb(args.image), params)
    vis = pca_visualize(stack)
    save_rgb(vis.rgb, args.out)
    note = " (degenerate: fewer than 3 components)" if vis.degenerate else ""
    print(f"PCA view written to {args.out}{note}")
    return 0


def _cmd_rank_vis(args) -> int:
    manifest = load_manifest(args.manifest)
    record = next((r for r in manifest.records if r.image_id == args.image_id), None)
    if record is None:
        raise DataError(f"image id {args.image_id!r} not in manifest")
    pred_path = Path(args.pred_dir) / f"{record.image_id}.png"
    if not pred_path.is_file():
        raise DataError(f"missing prediction {pred_path}")
    saliency = load_saliency(pred_path)
    instances = load_instances(manifest.path(record.instances))
    agreement = load_agreement(manifest.path(record.agreement))
    overlay = render_rank_overlay(saliency, instances, gt_rank_from_agreement(agreement, instances))
    save_rgb(overlay, args.out)
    print(f"overlay written to {args.out}")
    return 0


_COMMANDS = {
    "build-stack": _cmd_build_stack,
    "eval-detect": _cmd_eval_detect,
    "eval-rank": _cmd_eval_rank,
    "eval-subitize": _cmd_eval_subitize,
    "gen-synthetic": _cmd_gen_synthetic,
    "train-toy": _cmd_train_toy,
    "infer": _cmd_infer,
    "pca-vis": _cmd_pca_vis,
    "rank-vis": _cmd_rank_vis,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except SalienceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
