"""Frozen-backbone transfer learning for the two-class drawing task.

A classifier is a pretrained convolutional feature extractor whose
weights never change, plus a small trainable head: global average
pooling, dropout 0.3, and a dense 2-way output. Because the backbone
is frozen and dropout sits after the pooling stage, backbone+pool
features are computed once per image and cached; the epoch loop then
trains the head on cached features, which is mathematically identical
to forwarding the full network every step.
"""

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import CLASS_ORDER, nn
from .backbones import BACKBONE_IDS, build_backbone, load_pretrained, params_digest
from .dataset import INPUT_SIZES
from .errors import ConfigError, DivergenceError, InputError

HEAD_DROPOUT = 0.3
HISTORY_HEADER = ("epoch", "train_acc", "train_loss", "val_acc", "val_loss")


@dataclass(frozen=True)
class TrainingConfig:
    backbone: str
    drawing_type: str
    epochs: int = 100
    patience: int = 3
    input_size: int = 224
    batch_size: int = 32
    learning_rate: float = 1e-3
    split_ratio: float = 0.8
    seed: int = 42
    early_stop_enabled: bool = True

    def __post_init__(self):
        if self.backbone not in BACKBONE_IDS:
            raise ConfigError(
                f"unknown backbone {self.backbone!r}; expected one of "
                + ", ".join(BACKBONE_IDS))
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must be in (0, 1)")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_accuracy: float
    train_loss: float
    val_accuracy: float
    val_loss: float


@dataclass
class TrainingHistory:
    config: TrainingConfig
    records: list = field(default_factory=list)
    stopped_early: bool = False
    best_epoch: int = 0
    wall_time_s: float = 0.0

    @property
    def epochs_run(self):
        return len(self.records)

    def val_accuracies(self):
        return [r.val_accuracy for r in self.records]

    def best_record(self):
        return self.records[self.best_epoch - 1]


class ModelHandle:
    """A frozen feature extractor plus its trainable head."""

    def __init__(self, backbone_id, input_size, norm, backbone_net,
                 feature_dim, head):
        self.backbone_id = backbone_id
        self.input_size = input_size
        self.norm = norm
        self.backbone = backbone_net
        self.feature_dim = feature_dim
        self.head = head
        self.backbone_digest = params_digest(backbone_net)

    def extract_features(self, x, batch_size=64):
        """Backbone forward + global average pool, never trained."""
        n = len(x)
        out = np.empty((n, self.feature_dim), dtype=np.float32)
        for i in range(0, n, batch_size):
            fmap = self.backbone(x[i:i + batch_size])
            out[i:i + batch_size] = fmap.mean(axis=(1, 2))
        return out

    def head_forward(self, features, training=False):
        return self.head(features, training=training)

    def predict_proba(self, x, batch_size=64):
        logits = self.head_forward(self.extract_features(x, batch_size))
        return nn.softmax(logits)

    def state(self):
        out = {}
        for key, val in self.backbone.state().items():
            out[f"backbone/{key}"] = val
        for key, val in self.head.state().items():
            out[f"head/{key}"] = val
        return out

    def load_state(self, state):
        backbone = {k[len("backbone/"):]: v for k, v in state.items()
                    if k.startswith("backbone/")}
        head = {k[len("head/"):]: v for k, v in state.items()
                if k.startswith("head/")}
        self.backbone.load_state(backbone)
        self.head.load_state(head)
        self.backbone_digest = params_digest(self.backbone)

    def manifest_fields(self):
        return {
            "backbone": self.backbone_id,
            "input_size": self.input_size,
            "norm": self.norm,
        }


def _make_head(feature_dim, seed):
    rng = np.random.default_rng([seed, 60321])
    return nn.Sequential([
        nn.Dropout(HEAD_DROPOUT),
        nn.Dense(feature_dim, len(CLASS_ORDER), rng=rng),
    ])


def build_classifier(backbone, input_size, seed, norm="signed_unit"):
    """Assemble a frozen pretrained backbone with a fresh seeded head."""
    if input_size not in INPUT_SIZES:
        raise ConfigError(
            f"input_size must be one of {INPUT_SIZES}, got {input_size!r}")
    net, feature_dim, _meta = load_pretrained(backbone)
    head = _make_head(feature_dim, seed)
    return ModelHandle(backbone, input_size, norm, net, feature_dim, head)


def early_stop_check(val_accuracies, patience):
    """True when the trailing `patience` epochs brought no improvement.

    Improvement means strictly exceeding the best value seen so far;
    any improvement resets the counter.
    """
    if patience < 1:
        raise ConfigError("patience must be >= 1")
    best = -np.inf
    wait = 0
    for acc in val_accuracies:
        if acc > best:
            best = acc
            wait = 0
        else:
            wait += 1
    return wait >= patience


def _check_arrays(name, data, input_size):
    x, y = data
    if len(x) == 0:
        raise InputError(f"{name} set is empty")
    if x.shape[1:] != (input_size, input_size, 3):
        raise InputError(
            f"{name} set shaped {x.shape[1:]} but config.input_size is "
            f"{input_size}")
    if len(x) != len(y):
        raise InputError(f"{name} images/labels length mismatch")
    return np.asarray(x, dtype=np.float32), np.asarray(y, dtype=np.int64)


def _eval_cached(model, features, labels, batch_size):
    hits = 0
    loss_sum = 0.0
    for i in range(0, len(features), batch_size):
        logits = model.head_forward(features[i:i + batch_size])
        loss, _, probs = nn.cross_entropy(logits, labels[i:i + batch_size])
        loss_sum += loss * len(logits)
        hits += int((probs.argmax(axis=1) == labels[i:i + batch_size]).sum())
    return hits / len(features), loss_sum / len(features)


def train(model, train_data, val_data, config):
    """Run the head-training epoch loop; returns (history, model).

    Per-epoch metrics: train accuracy/loss are the running averages
    over the epoch's optimization batches (dropout active); validation
    metrics are computed after the epoch with dropout off. With early
    stopping enabled the head is restored to its best-epoch weights
    before returning, otherwise the final-epoch weights stay.
    """
    x_tr, y_tr = _check_arrays("train", train_data, config.input_size)
    x_va, y_va = _check_arrays("validation", val_data, config.input_size)
    if model.backbone_id != config.backbone:
        raise ConfigError(
            f"model is {model.backbone_id!r} but config.backbone is "
            f"{config.backbone!r}")

    started = time.time()
    f_tr = model.extract_features(x_tr)
    f_va = model.extract_features(x_va)

    dropouts = [m for _, m in model.head.named_modules()
                if isinstance(m, nn.Dropout)]
    opt = nn.Adam(model.head.params(), lr=config.learning_rate)
    history = TrainingHistory(config=config)
    best_acc = -np.inf
    best_state = None

    for epoch in range(1, config.epochs + 1):
        order = np.random.default_rng([config.seed, 101, epoch]).permutation(len(f_tr))
        drop_rng = np.random.default_rng([config.seed, 202, epoch])
        for d in dropouts:
            d.rng = drop_rng
        loss_sum = 0.0
        hits = 0
        for i in range(0, len(order), config.batch_size):
            idx = order[i:i + config.batch_size]
            logits = model.head_forward(f_tr[idx], training=True)
            loss, dlogits, probs = nn.cross_entropy(logits, y_tr[idx])
            if not np.isfinite(loss):
                history.wall_time_s = time.time() - started
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}", history=history)
            opt.zero_grad()
            model.head.backward(dlogits)
            opt.step()
            loss_sum += loss * len(idx)
            hits += int((probs.argmax(axis=1) == y_tr[idx]).sum())

        val_acc, val_loss = _eval_cached(model, f_va, y_va, config.batch_size)
        history.records.append(EpochRecord(
            epoch=epoch,
            train_accuracy=hits / len(f_tr),
            train_loss=loss_sum / len(f_tr),
            val_accuracy=val_acc,
            val_loss=val_loss,
        ))
        if val_acc > best_acc:
            best_acc = val_acc
            best_state = model.head.state()
        if config.early_stop_enabled and early_stop_check(
                history.val_accuracies(), config.patience):
            history.stopped_early = True
            break

    accs = history.val_accuracies()
    history.best_epoch = int(np.argmax(accs)) + 1
    if config.early_stop_enabled and best_state is not None:
        model.head.load_state(best_state)
    history.wall_time_s = time.time() - started
    return history, model


def evaluate(model, data, batch_size=64):
    """Accuracy (argmax, ties to class 0) and mean cross-entropy loss."""
    x, y = data
    if len(x) == 0:
        raise InputError("evaluate needs a nonempty dataset")
    x = np.asarray(x, dtype=np.float32)
    y = np.asarray(y, dtype=np.int64)
    features = model.extract_features(x, batch_size)
    return _eval_cached(model, features, y, batch_size)


def write_history_csv(history, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_HEADER)
        for r in history.records:
            writer.writerow([
                r.epoch,
                format(r.train_accuracy, ".6g"),
                format(r.train_loss, ".6g"),
                format(r.val_accuracy, ".6g"),
                format(r.val_loss, ".6g"),
            ])
    return path


def write_run(history, out_dir, extra=None):
    """Persist one training run: history.csv + run.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_history_csv(history, out_dir / "history.csv")
    manifest = {
        "config": asdict(history.config),
        "stopped_early": history.stopped_early,
        "best_epoch": history.best_epoch,
        "epochs_run": history.epochs_run,
        "wall_time_s": round(history.wall_time_s, 3),
    }
    if extra:
        manifest.update(extra)
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=1))
    return out_dir


def load_run(run_dir):
    """Rebuild a TrainingHistory from a write_run directory."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "run.json").read_text())
    config = TrainingConfig(**manifest["config"])
    records = []
    with (run_dir / "history.csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(EpochRecord(
                epoch=int(row["epoch"]),
                train_accuracy=float(row["train_acc"]),
                train_loss=float(row["train_loss"]),
                val_accuracy=float(row["val_acc"]),
                val_loss=float(row["val_loss"]),
            ))
    return TrainingHistory(
        config=config,
        records=records,
        stopped_early=manifest["stopped_early"],
        best_epoch=manifest["best_epoch"],
        wall_time_s=manifest["wall_time_s"],
    )


MODEL_META_KEY = "__model__"


def save_model(model, path):
    """Write the full classifier (backbone + head) as one npz."""
    meta = {
        "backbone": model.backbone_id,
        "input_size": model.input_size,
        "norm": model.norm,
        "feature_dim": model.feature_dim,
    }
    blob = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), np.uint8)
    np.savez_compressed(path, **{MODEL_META_KEY: blob}, **model.state())


def load_model(path):
    """Rebuild a ModelHandle saved by save_model."""
    with np.load(path) as z:
        meta = json.loads(bytes(z[MODEL_META_KEY]).decode())
        state = {k: z[k] for k in z.files if k != MODEL_META_KEY}
    net, feature_dim = build_backbone(meta["backbone"])
    head = _make_head(feature_dim, seed=0)
    model = ModelHandle(meta["backbone"], int(meta["input_size"]),
                        meta["norm"], net, feature_dim, head)
    model.load_state(state)
    return model
