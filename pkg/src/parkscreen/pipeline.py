"""End-to-end orchestration: corpus -> augment -> split -> train -> export.

Two pipeline modes exist. The default augments the whole corpus to the
target count and then splits (training-image siblings may land in
validation). The leakage-safe mode splits the originals first and
augments the two sides separately, so no validation image shares a
parent with a training image.
"""

import time
from dataclasses import dataclass, field

from .augmentation import AugmentationSpec, augment_set
from .dataset import load_dataset, prepare_arrays, stratified_split
from .errors import ConfigError
from .inference import export_bundle
from .training import TrainingConfig, build_classifier, evaluate, train


@dataclass
class PipelineResult:
    config: TrainingConfig
    history: object
    model: object
    summary: object
    train_count: int = 0
    val_count: int = 0
    val_accuracy: float = 0.0
    val_loss: float = 0.0
    bundle_path: object = None
    run_id: str = ""
    extras: dict = field(default_factory=dict)


def default_spec(target_count, seed):
    return AugmentationSpec(target_count=target_count, seed=seed)


def run_id_for(config):
    return (f"{config.backbone}-{config.drawing_type}-s{config.seed}"
            f"-i{config.input_size}")


def prepare_split(data_root, config, augment_count, spec=None,
                  split_before_augment=False):
    """Load, optionally augment, and split one drawing-type corpus.

    Returns (train_images, val_images, summary). augment_count of 0 or
    None skips augmentation entirely.
    """
    images, summary = load_dataset(data_root, config.drawing_type)
    if augment_count:
        if augment_count < len(images):
            raise ConfigError(
                f"augment count {augment_count} is below the corpus size "
                f"({len(images)})")
        if split_before_augment:
            pair = stratified_split(images, config.split_ratio, config.seed)
            n_train = int(augment_count * config.split_ratio)
            train_imgs = augment_set(pair.train, spec or AugmentationSpec(
                target_count=n_train, seed=config.seed))
            val_imgs = augment_set(pair.validation, AugmentationSpec(
                target_count=augment_count - n_train, seed=config.seed + 1))
            return train_imgs, val_imgs, summary
        spec = spec or default_spec(augment_count, config.seed)
        images = augment_set(images, spec)
    pair = stratified_split(images, config.split_ratio, config.seed)
    return pair.train, pair.validation, summary


def train_pipeline(data_root, config, augment_count=1000,
                   split_before_augment=False, bundle_path=None,
                   progress=None):
    """Run the full training pipeline for one backbone and drawing type."""
    say = progress or (lambda msg: None)
    t0 = time.time()
    say(f"loading {config.drawing_type} corpus from {data_root}")
    train_imgs, val_imgs, summary = prepare_split(
        data_root, config, augment_count,
        split_before_augment=split_before_augment)
    say(f"prepared {len(train_imgs)} train / {len(val_imgs)} validation "
        f"images in {time.time() - t0:.1f}s")

    train_data = prepare_arrays(train_imgs, config.input_size)
    val_data = prepare_arrays(val_imgs, config.input_size)

    model = build_classifier(config.backbone, config.input_size, config.seed)
    say(f"training {config.backbone} head "
        f"(epochs<={config.epochs}, patience={config.patience})")
    history, model = train(model, train_data, val_data, config)
    best = history.best_record()
    say(f"finished after {history.epochs_run} epochs "
        f"(best epoch {history.best_epoch}: "
        f"val_acc={best.val_accuracy:.4f}, val_loss={best.val_loss:.4f})")

    val_accuracy, val_loss = evaluate(model, val_data)
    result = PipelineResult(
        config=config,
        history=history,
        model=model,
        summary=summary,
        train_count=len(train_imgs),
        val_count=len(val_imgs),
        val_accuracy=val_accuracy,
        val_loss=val_loss,
        run_id=run_id_for(config),
    )
    if bundle_path is not None:
        result.bundle_path = export_bundle(
            model, config.drawing_type, result.run_id, bundle_path)
        say(f"exported bundle {result.bundle_path}")
    return result
