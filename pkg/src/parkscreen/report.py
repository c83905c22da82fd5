"""Comparison tables and learning-curve datasets for trained runs.

The comparison row for a run is taken at its best epoch (highest
validation accuracy, earliest on ties). All floats are serialized with
six significant digits so emitted CSVs re-parse bit-identically.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError


@dataclass(frozen=True)
class ComparisonRow:
    backbone: str
    drawing_type: str
    val_accuracy: float
    val_loss: float
    stopped_early: bool
    epochs_run: int


COMPARISON_HEADER = ("backbone", "drawing_type", "val_accuracy", "val_loss",
                     "stopped_early", "epochs_run")
CURVES_HEADER = ("epoch", "train_accuracy", "val_accuracy")


def _fmt(x):
    return format(x, ".6g")


def compare_backbones(histories):
    """One row per history, best first.

    Ordering: validation accuracy descending, then validation loss
    ascending, then backbone name — a total order, so any permutation
    of the input produces the same table.
    """
    if not histories:
        raise InputError("compare_backbones needs at least one history")
    types = sorted({h.config.drawing_type for h in histories})
    if len(types) != 1:
        raise InputError(
            f"histories mix drawing types {types}; compare one type at a time")
    rows = []
    for h in histories:
        best = h.best_record()
        rows.append(ComparisonRow(
            backbone=h.config.backbone,
            drawing_type=h.config.drawing_type,
            val_accuracy=best.val_accuracy,
            val_loss=best.val_loss,
            stopped_early=h.stopped_early,
            epochs_run=h.epochs_run,
        ))
    rows.sort(key=lambda r: (-r.val_accuracy, r.val_loss, r.backbone,
                             r.epochs_run))
    return rows


def write_comparison_csv(rows, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARISON_HEADER)
        for r in rows:
            writer.writerow([r.backbone, r.drawing_type,
                             _fmt(r.val_accuracy), _fmt(r.val_loss),
                             str(r.stopped_early).lower(), r.epochs_run])
    return path


def emit_learning_curves(history, out_path):
    """Write the accuracy-vs-epoch series of one run as CSV."""
    if not history.records:
        raise InputError("history has no epoch records")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVES_HEADER)
        for r in history.records:
            writer.writerow([r.epoch, _fmt(r.train_accuracy),
                             _fmt(r.val_accuracy)])
    return out_path


def read_curves(path):
    """Parse an emit_learning_curves file back into metric lists."""
    epochs, train_acc, val_acc = [], [], []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            epochs.append(int(row["epoch"]))
            train_acc.append(float(row["train_accuracy"]))
            val_acc.append(float(row["val_accuracy"]))
    return epochs, train_acc, val_acc


def generate_report(histories_by_type, out_dir):
    """Emit comparison tables plus per-run curve files under out_dir."""
    out_dir = Path(out_dir)
    written = []
    for drawing_type, histories in sorted(histories_by_type.items()):
        if not histories:
            continue
        rows = compare_backbones(histories)
        written.append(write_comparison_csv(
            rows, out_dir / f"comparison_{drawing_type}.csv"))
        for h in histories:
            name = f"{h.config.backbone}_{drawing_type}.csv"
            written.append(emit_learning_curves(h, out_dir / "curves" / name))
    return written
