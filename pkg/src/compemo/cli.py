"""Command-line entry point: curate, train, predict, eval, synth.

Option precedence is flags > config file > built-in defaults; the config
file is plain `key = value` text with the same names as the long flags
(dashes or underscores). Exit codes: 0 success, 1 data or configuration
error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import curation, synth, trainer
from .errors import ConfigError, DataError
from .evaluation import score_files
from .features import FeatureStore
from .inference import predict_video, write_predictions
from .labels import CompoundSet, DEFAULT_COMPOUND_SET
from .network import load_checkpoint, save_checkpoint


def read_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`")
        key, value = stripped.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Fill None-valued options from the config file, then from defaults."""
    file_cfg = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in file_cfg:
            cast = type(default) if default is not None else str
            try:
                setattr(args, key, cast(file_cfg[key]))
            except ValueError:
                raise ConfigError(f"config key {key}: bad value {file_cfg[key]!r}") from None
        else:
            setattr(args, key, default)
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return args


def _load_compound_set(args: argparse.Namespace) -> CompoundSet:
    if getattr(args, "manifest", None):
        return curation.read_manifest(args.manifest).compound_set
    if getattr(args, "compound_set", None):
        try:
            pairs = json.loads(Path(args.compound_set).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad compound set file {args.compound_set}: {exc}") from None
        return CompoundSet.from_pairs(pairs)
    return DEFAULT_COMPOUND_SET


CURATE_DEFAULTS = {"target_count": 0}


def cmd_curate(args: argparse.Namespace) -> int:
    args = _resolve(args, CURATE_DEFAULTS)
    records = curation.read_votes_csv(args.votes_csv)
    cset = _load_compound_set(args)
    manifest = curation.build_manifest(
        records, cset, curation.BalanceConfig(target_count=args.target_count))
    curation.write_manifest(manifest, args.out)
    counts = manifest.class_counts()
    total = len(manifest.entries)
    print(f"wrote {args.out}: {total} entries "
          f"({sum(counts.values())} compound, {total - sum(counts.values())} supplements)")
    return 0


TRAIN_DEFAULTS = {
    "epochs": 50, "batch_size": 90, "lr": 3e-4, "seed": 0,
    "anchors": 1, "width": 64, "layers": 1, "heads": 4,
    "class_weight": 1.0, "va_weight": 1.0,
}


def cmd_train(args: argparse.Namespace) -> int:
    args = _resolve(args, TRAIN_DEFAULTS)
    manifest = curation.read_manifest(args.manifest)
    store = FeatureStore(args.features_dir)
    try:
        config = trainer.TrainConfig(
            epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
            seed=args.seed, anchors=args.anchors, width=args.width,
            layers=args.layers, heads=args.heads,
            class_weight=args.class_weight, va_weight=args.va_weight)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    params, metrics = trainer.train(config, manifest, store)
    save_checkpoint(params, args.out)
    trainer.write_metrics(metrics, args.metrics)
    final = metrics[-1]
    print(f"wrote {args.out}; final loss {final.loss:.4f}, "
          f"accuracy {final.accuracy:.4f}")
    return 0


PREDICT_DEFAULTS = {"threshold": 0.5, "threads": 1}


def cmd_predict(args: argparse.Namespace) -> int:
    args = _resolve(args, PREDICT_DEFAULTS)
    if args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    params = load_checkpoint(args.checkpoint)
    cset = _load_compound_set(args)
    store = FeatureStore(args.features_dir)
    clip_ids = store.clip_ids()
    if not clip_ids:
        raise DataError(f"no feature files under {args.features_dir}")

    def predict_clip(clip_id: str) -> list[tuple[str, int, str]]:
        video = store.load(clip_id)
        preds = predict_video(params, cset, video, threshold=args.threshold)
        return [(clip_id, t, p.label.name) for t, p in enumerate(preds)]

    rows: list[tuple[str, int, str]] = []
    if args.threads == 1:
        for clip_id in clip_ids:
            rows.extend(predict_clip(clip_id))
    else:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for clip_rows in pool.map(predict_clip, clip_ids):
                rows.extend(clip_rows)
    write_predictions(rows, args.out)
    print(f"wrote {args.out}: {len(rows)} frames over {len(clip_ids)} clips")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    args = _resolve(args, {})
    report = score_files(args.pred_csv, args.truth_csv, _load_compound_set(args))
    if args.json_out:
        Path(args.json_out).write_text(report.to_json())
    print(report.to_text())
    return 0


SYNTH_DEFAULTS = {
    "seed": 0, "clips_per_class": 30, "eval_clips_per_class": 4,
    "singles_per_emotion": 0, "frames": "24:48", "dim": 16,
    "margin": 2.0, "mask_dropout": 0.1,
}


def cmd_synth(args: argparse.Namespace) -> int:
    args = _resolve(args, SYNTH_DEFAULTS)
    try:
        lo, hi = (int(part) for part in args.frames.split(":"))
    except ValueError:
        raise ConfigError(f"--frames wants MIN:MAX, got {args.frames!r}") from None
    config = synth.SynthConfig(
        seed=args.seed, clips_per_class=args.clips_per_class,
        eval_clips_per_class=args.eval_clips_per_class,
        singles_per_emotion=args.singles_per_emotion,
        frames_min=lo, frames_max=hi, dim=args.dim,
        margin=args.margin, mask_dropout=args.mask_dropout)
    synth.generate(config, args.out, _load_compound_set(args))
    print(f"wrote synthetic corpus under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compemo",
        description="Frame-level compound facial expression pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value options file")

    p = sub.add_parser("curate", help="turn a vote table into a training manifest")
    p.add_argument("votes_csv")
    p.add_argument("--out", default="manifest.jsonl")
    p.add_argument("--target-count", type=int, dest="target_count",
                   help="per-class balancing target (0 disables)")
    p.add_argument("--compound-set", dest="compound_set",
                   help="JSON file of 7 [first, second] emotion pairs")
    add_common(p)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("train", help="train the sequence classifier")
    p.add_argument("manifest")
    p.add_argument("features_dir")
    p.add_argument("--out", default="model.ckpt")
    p.add_argument("--metrics", default="metrics.csv")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--anchors", type=int, help="anchor frames per clip")
    p.add_argument("--width", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--class-weight", type=float, dest="class_weight")
    p.add_argument("--va-weight", type=float, dest="va_weight")
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write per-frame labels for every clip")
    p.add_argument("checkpoint")
    p.add_argument("features_dir")
    p.add_argument("--out", default="predictions.csv")
    p.add_argument("--manifest", help="read the compound set from this manifest")
    p.add_argument("--compound-set", dest="compound_set")
    p.add_argument("--threshold", type=float, help="VA sign threshold")
    p.add_argument("--threads", type=int, help="parallel clip workers")
    add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against truth")
    p.add_argument("pred_csv")
    p.add_argument("truth_csv")
    p.add_argument("--json-out", dest="json_out", help="also write a JSON report")
    p.add_argument("--manifest", help="read the compound set from this manifest")
    p.add_argument("--compound-set", dest="compound_set")
    add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--clips-per-class", type=int, dest="clips_per_class")
    p.add_argument("--eval-clips-per-class", type=int, dest="eval_clips_per_class")
    p.add_argument("--singles-per-emotion", type=int, dest="singles_per_emotion")
    p.add_argument("--frames", help="frame count range MIN:MAX")
    p.add_argument("--dim", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("--mask-dropout", type=float, dest="mask_dropout")
    p.add_argument("--compound-set", dest="compound_set")
    add_common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
