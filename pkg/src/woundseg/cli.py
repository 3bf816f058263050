"""Command line entry points: dedup, split, train, eval, serve, infer."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .config import ServiceConfig, load_service_config, load_train_config


def _cmd_dedup(args):
    samples = corpus_mod.load_corpus(args.root)
    groups = corpus_mod.find_duplicates(samples, max_distance=args.max_distance)
    retained, report = corpus_mod.deduplicate(samples, groups)
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    print(
        f"corpus: {len(samples)} samples, {len(groups)} duplicate groups, "
        f"{report.pair_count} discarded, {len(retained)} retained",
        file=sys.stderr,
    )


def _cmd_split(args):
    ratios = tuple(float(r) for r in args.ratios.split(","))
    if len(ratios) != 3:
        raise SystemExit("--ratios must be three comma-separated numbers")
    samples = corpus_mod.load_corpus(args.root)
    groups = corpus_mod.find_duplicates(samples, max_distance=args.max_distance)
    retained, report = corpus_mod.deduplicate(samples, groups)
    manifest = corpus_mod.make_splits(retained, ratios=ratios, seed=args.seed)
    out = Path(args.out) if args.out else Path(args.root) / "splits.csv"
    corpus_mod.write_split_manifest(manifest, out)
    print(
        f"splits {manifest.counts} over {len(retained)} retained samples "
        f"({report.pair_count} duplicates discarded) -> {out}",
        file=sys.stderr,
    )


def _load_split_pairs(root, manifest_path, split):
    manifest = corpus_mod.read_split_manifest(manifest_path)
    ids = manifest.ids_for(split)
    if not ids:
        raise SystemExit(f"manifest has no ids for split {split!r}")
    return [corpus_mod.load_pair_arrays(root, i) for i in ids]


def _cmd_train(args):
    from .training import train

    config = load_train_config(args.config)
    if not config.data_root or not config.manifest:
        raise SystemExit("config must set data.root and data.manifest")
    train_pairs = _load_split_pairs(config.data_root, config.manifest, "train")
    val_pairs = _load_split_pairs(config.data_root, config.manifest, "val")
    run_dir = Path(args.run_dir) if args.run_dir else Path("runs") / config.variant
    result = train(config, train_pairs, val_pairs, run_dir)
    best = result.best
    print(f"run directory: {result.run_dir}")
    if best:
        print(f"best checkpoint: epoch {best.epoch} val_iou {best.val_iou:.4f}")


def _cmd_eval(args):
    import torch

    from .models import build_model
    from .training import evaluate
    from .weights import load_weights, read_archive_meta

    meta = read_archive_meta(args.ckpt)
    variant = args.variant or meta.get("variant")
    if not variant:
        raise SystemExit("checkpoint lacks a variant; pass --variant")
    network = build_model(variant, seed=0)
    load_weights(network, args.ckpt)
    pairs = _load_split_pairs(args.root, args.manifest, args.split)
    with torch.inference_mode():
        report = evaluate(network, pairs, threshold=args.threshold,
                          resize=args.resize)
    print(json.dumps(report.as_dict(), indent=2))


def _cmd_serve(args):
    from .service import serve

    config = load_service_config(args.config) if args.config else ServiceConfig()
    if args.port is not None:
        config.port = args.port
    if args.host is not None:
        config.host = args.host
    serve(config)


def _cmd_infer(args):
    from .service import infer_file

    mask_path, meta_path = infer_file(
        args.image, ckpt=args.ckpt, variant=args.variant,
        threshold=args.threshold, out_path=args.out,
    )
    print(f"mask: {mask_path}")
    print(meta_path.read_text().strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="woundseg")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dedup", help="find and report duplicate images")
    p.add_argument("--root", required=True)
    p.add_argument("--max-distance", type=int, default=11)
    p.add_argument("--report", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_dedup)

    p = sub.add_parser("split", help="dedup then write a train/val/test manifest")
    p.add_argument("--root", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ratios", default="0.6,0.2,0.2")
    p.add_argument("--max-distance", type=int, default=11)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="run the training protocol from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--root", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--variant")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--resize", type=int, default=512)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the streaming inference service")
    p.add_argument("--config")
    p.add_argument("--port", type=int)
    p.add_argument("--host")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("infer", help="segment one image file")
    p.add_argument("--ckpt")
    p.add_argument("--image", required=True)
    p.add_argument("--threshold", type=float, default=0.75)
    p.add_argument("--variant")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_infer)

    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
