"""Command-line interface for the full screening pipeline.

Subcommands: synth, augment, train, evaluate, report, export, predict,
serve. Usage errors exit with status 2 (argparse), pipeline errors with
status 1 and a diagnostic on stderr. Every stochastic command accepts
--seed. Environment overrides: PARKSCREEN_PORT, PARKSCREEN_SPIRAL_BUNDLE
and PARKSCREEN_WAVE_BUNDLE.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import DRAWING_TYPES, __version__
from .augmentation import AugmentationSpec, augment_set, save_augmented
from .backbones import BACKBONE_IDS
from .dataset import INPUT_SIZES, load_dataset, prepare_arrays
from .errors import ParkscreenError
from .inference import export_bundle, fuse, load_bundle
from .pipeline import run_id_for, train_pipeline
from .report import generate_report
from .service import canonical_json, fusion_payload
from .training import (
    TrainingConfig,
    evaluate,
    load_model,
    load_run,
    save_model,
    write_run,
)

ENV_PORT = "PARKSCREEN_PORT"
ENV_SPIRAL_BUNDLE = "PARKSCREEN_SPIRAL_BUNDLE"
ENV_WAVE_BUNDLE = "PARKSCREEN_WAVE_BUNDLE"


def _say(msg):
    print(msg, file=sys.stderr, flush=True)


def _print_json(obj):
    print(json.dumps(obj, indent=1))


def cmd_synth(args):
    from .synthdata import generate_corpus

    summary = generate_corpus(args.out, per_class=args.per_class,
                              size=args.size, seed=args.seed,
                              types=tuple(args.types.split(",")))
    _print_json({"root": str(args.out), "seed": args.seed,
                 "counts": summary})
    return 0


def cmd_augment(args):
    images, summary = load_dataset(args.in_dir, args.type)
    spec = AugmentationSpec(
        rotation_degrees=args.rotation,
        zoom_lo=args.zoom_lo,
        zoom_hi=args.zoom_hi,
        allow_hflip=not args.no_hflip,
        allow_vflip=not args.no_vflip,
        target_count=args.count,
        seed=args.seed,
    )
    augmented = augment_set(images, spec)
    manifest = save_augmented(augmented, args.out)
    _print_json({
        "input": summary.to_dict(),
        "output_count": len(augmented),
        "out": str(args.out),
        "manifest": str(manifest),
    })
    return 0


def cmd_train(args):
    config = TrainingConfig(
        backbone=args.backbone,
        drawing_type=args.type,
        epochs=args.epochs,
        patience=args.patience,
        input_size=args.input_size,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        split_ratio=args.split,
        seed=args.seed,
        early_stop_enabled=not args.no_early_stop,
    )
    result = train_pipeline(
        args.data, config,
        augment_count=args.augment_count,
        split_before_augment=args.split_before_augment,
        progress=_say,
    )
    out_dir = Path(args.out)
    write_run(result.history, out_dir, extra={
        "run_id": result.run_id,
        "backbone_digest": result.model.backbone_digest,
        "train_count": result.train_count,
        "val_count": result.val_count,
        "corpus": result.summary.to_dict(),
    })
    save_model(result.model, out_dir / "model.npz")
    best = result.history.best_record()
    _print_json({
        "run_dir": str(out_dir),
        "run_id": result.run_id,
        "epochs_run": result.history.epochs_run,
        "stopped_early": result.history.stopped_early,
        "best_epoch": result.history.best_epoch,
        "best_val_accuracy": round(best.val_accuracy, 6),
        "best_val_loss": round(best.val_loss, 6),
    })
    return 0


def cmd_evaluate(args):
    bundle = load_bundle(args.bundle)
    images, summary = load_dataset(args.data, bundle.drawing_type)
    data = prepare_arrays(images, bundle.manifest["input_size"],
                          bundle.manifest["norm"])
    accuracy, loss = evaluate(bundle.model, data)
    _print_json({
        "bundle": str(args.bundle),
        "run_id": bundle.run_id,
        "drawing_type": bundle.drawing_type,
        "count": summary.total,
        "accuracy": round(accuracy, 6),
        "loss": round(loss, 6),
    })
    return 0


def cmd_report(args):
    runs = sorted(p.parent for p in Path(args.runs).glob("*/run.json"))
    if not runs:
        _say(f"error: no run directories under {args.runs}")
        return 1
    histories = {}
    for run_dir in runs:
        h = load_run(run_dir)
        histories.setdefault(h.config.drawing_type, []).append(h)
    written = generate_report(histories, args.out)
    _print_json({"runs": len(runs), "files": [str(p) for p in written]})
    return 0


def cmd_export(args):
    run_dir = Path(args.run)
    model = load_model(run_dir / "model.npz")
    manifest = json.loads((run_dir / "run.json").read_text())
    drawing_type = manifest["config"]["drawing_type"]
    run_id = manifest.get("run_id") or run_id_for(
        TrainingConfig(**manifest["config"]))
    out = Path(args.out) if args.out else run_dir / (
        f"{model.backbone_id}_{drawing_type}.bundle")
    path = export_bundle(model, drawing_type, run_id, out)
    _print_json({"bundle": str(path), "run_id": run_id,
                 "drawing_type": drawing_type})
    return 0


def _resolve_bundles(args, parser):
    spiral_path = args.spiral_bundle or os.environ.get(ENV_SPIRAL_BUNDLE)
    wave_path = args.wave_bundle or os.environ.get(ENV_WAVE_BUNDLE)
    if args.spiral and not spiral_path:
        parser.error("a spiral image needs --spiral-bundle "
                     f"(or ${ENV_SPIRAL_BUNDLE})")
    if args.wave and not wave_path:
        parser.error(f"a wave image needs --wave-bundle (or ${ENV_WAVE_BUNDLE})")
    return spiral_path, wave_path


def cmd_predict(args, parser):
    if not args.spiral and not args.wave:
        parser.error("provide at least one of --spiral and --wave")
    spiral_path, wave_path = _resolve_bundles(args, parser)
    bundles = {}
    if spiral_path:
        bundles["spiral"] = load_bundle(spiral_path)
    if wave_path:
        bundles["wave"] = load_bundle(wave_path)

    predictions = {}
    for name, image_path in (("spiral", args.spiral), ("wave", args.wave)):
        if image_path:
            predictions[name] = bundles[name].predict(
                Path(image_path).read_bytes())
    result = fuse(spiral=predictions.get("spiral"),
                  wave=predictions.get("wave"))
    versions = {name: b.run_id for name, b in bundles.items()}
    sys.stdout.buffer.write(canonical_json(fusion_payload(result, versions)))
    sys.stdout.buffer.write(b"\n")
    sys.stdout.buffer.flush()
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    spiral_path = args.spiral_bundle or os.environ.get(ENV_SPIRAL_BUNDLE)
    wave_path = args.wave_bundle or os.environ.get(ENV_WAVE_BUNDLE)
    if not spiral_path or not wave_path:
        _say("error: serve needs both --spiral-bundle and --wave-bundle "
             f"(or ${ENV_SPIRAL_BUNDLE} / ${ENV_WAVE_BUNDLE})")
        return 1
    port = args.port if args.port is not None else int(
        os.environ.get(ENV_PORT, "8077"))
    app = create_app(spiral_path, wave_path, cors_origins=args.cors)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parkscreen",
        description="Drawing-based Parkinson's screening pipeline.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic drawing corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--per-class", type=int, default=51)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--types", default=",".join(DRAWING_TYPES))
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("augment", help="expand a corpus with geometric "
                                       "transforms")
    p.add_argument("--in", type=Path, required=True, dest="in_dir",
                   metavar="IN")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--type", choices=DRAWING_TYPES, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--rotation", type=float, default=25.0)
    p.add_argument("--zoom-lo", type=float, default=0.85)
    p.add_argument("--zoom-hi", type=float, default=1.15)
    p.add_argument("--no-hflip", action="store_true")
    p.add_argument("--no-vflip", action="store_true")
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("train", help="train one backbone on one drawing type")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--type", choices=DRAWING_TYPES, required=True)
    p.add_argument("--backbone", choices=BACKBONE_IDS, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--input-size", type=int, choices=INPUT_SIZES, default=224)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--augment-count", type=int, default=1000,
                   help="augment corpus to this size first; 0 disables")
    p.add_argument("--split-before-augment", action="store_true",
                   help="leakage-safe mode: split originals, then augment "
                        "each side separately")
    p.add_argument("--no-early-stop", action="store_true")
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("evaluate", help="evaluate a bundle on a corpus tree")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)

    p = sub.add_parser("report", help="emit comparison tables and curves")
    p.add_argument("--runs", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("export", help="package a trained run as a bundle")
    p.add_argument("--run", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("predict", help="fused verdict for drawing images")
    p.add_argument("--spiral", type=Path)
    p.add_argument("--wave", type=Path)
    p.add_argument("--spiral-bundle", type=Path)
    p.add_argument("--wave-bundle", type=Path)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--spiral-bundle", type=Path)
    p.add_argument("--wave-bundle", type=Path)
    p.add_argument("--cors", action="append", default=None,
                   help="allowed CORS origin (repeatable)")

    return parser


COMMANDS = {
    "synth": cmd_synth,
    "augment": cmd_augment,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "export": cmd_export,
    "serve": cmd_serve,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "predict":
            return cmd_predict(args, parser)
        return COMMANDS[args.command](args)
    except (ParkscreenError, FileNotFoundError) as exc:
        _say(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
