"""Corpus loading, preprocessing and stratified splitting.

The on-disk layout is `root/<drawing_type>/<class>/*.{png,jpg,jpeg}`
with class directories named `healthy` and `parkinson`. Loading is
deterministic: images are ordered lexicographically by their path
relative to the corpus root, and a second load of the same tree yields
the identical sequence.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import CLASS_ORDER, DRAWING_TYPES
from .errors import (
    ConfigError,
    DatasetLayoutError,
    EmptyClassError,
    StratificationError,
)
from .kernels import ops

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
INPUT_SIZES = (96, 160, 224)
NORMS = ("unit_interval", "signed_unit")
MIN_SIDE = 32

LABEL_INDEX = {label: i for i, label in enumerate(CLASS_ORDER)}


@dataclass(frozen=True)
class LabeledImage:
    """One drawing: 8-bit HxWx3 pixels plus its provenance."""

    pixels: np.ndarray
    drawing_type: str
    label: str
    source_id: str


@dataclass(frozen=True)
class DatasetSummary:
    drawing_type: str
    count_healthy: int
    count_parkinson: int
    total: int
    skipped: int

    def to_dict(self):
        return {
            "drawing_type": self.drawing_type,
            "count_healthy": self.count_healthy,
            "count_parkinson": self.count_parkinson,
            "total": self.total,
            "skipped": self.skipped,
        }


@dataclass(frozen=True)
class SplitPair:
    train: list
    validation: list
    ratio: float
    seed: int


def _read_image(path):
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def load_dataset(root, drawing_type):
    """Load every readable image under `root/<drawing_type>/`.

    Returns (images, summary). Unreadable or undersized files are
    skipped with a logged warning and counted in `summary.skipped`.
    """
    if drawing_type not in DRAWING_TYPES:
        raise ConfigError(
            f"unknown drawing type {drawing_type!r}; expected one of "
            + ", ".join(DRAWING_TYPES))
    root = Path(root)
    class_dirs = {}
    for label in CLASS_ORDER:
        d = root / drawing_type / label
        if not d.is_dir():
            raise DatasetLayoutError(f"missing directory: {d}")
        class_dirs[label] = d

    images = []
    counts = {label: 0 for label in CLASS_ORDER}
    skipped = 0
    for label, class_dir in class_dirs.items():
        files = sorted(p for p in class_dir.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        for path in files:
            try:
                pixels = _read_image(path)
            except Exception as exc:
                log.warning("skipping unreadable image %s: %s", path, exc)
                skipped += 1
                continue
            if pixels.shape[0] < MIN_SIDE or pixels.shape[1] < MIN_SIDE:
                log.warning("skipping undersized image %s: %dx%d", path,
                            pixels.shape[1], pixels.shape[0])
                skipped += 1
                continue
            images.append(LabeledImage(
                pixels=pixels,
                drawing_type=drawing_type,
                label=label,
                source_id=path.relative_to(root).as_posix(),
            ))
            counts[label] += 1
        if counts[label] == 0:
            raise EmptyClassError(
                f"no usable images in class directory: {class_dir}")

    images.sort(key=lambda im: im.source_id)
    summary = DatasetSummary(
        drawing_type=drawing_type,
        count_healthy=counts["healthy"],
        count_parkinson=counts["parkinson"],
        total=counts["healthy"] + counts["parkinson"],
        skipped=skipped,
    )
    return images, summary


def preprocess(image, input_size, norm="signed_unit"):
    """Map a drawing to the square float input a backbone consumes.

    Aspect ratio is preserved by centering the image on a white square
    before a bilinear resize. `norm` selects the value range: [0, 1]
    for unit_interval, [-1, 1] for signed_unit.
    """
    if input_size not in INPUT_SIZES:
        raise ConfigError(
            f"input_size must be one of {INPUT_SIZES}, got {input_size!r}")
    if norm not in NORMS:
        raise ConfigError(f"norm must be one of {NORMS}, got {norm!r}")

    pixels = image.pixels if isinstance(image, LabeledImage) else np.asarray(image)
    if pixels.ndim == 2:
        pixels = np.repeat(pixels[:, :, None], 3, axis=2)
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)

    h, w = pixels.shape[:2]
    side = max(h, w)
    if side != h or side != w:
        canvas = np.full((side, side, 3), 255, dtype=np.uint8)
        top = (side - h) // 2
        left = (side - w) // 2
        canvas[top:top + h, left:left + w] = pixels
        pixels = canvas

    resized = ops.bilinear_resize(pixels, input_size, input_size)
    out = resized.astype(np.float32)
    if norm == "unit_interval":
        out /= 255.0
    else:
        out = out / 127.5 - 1.0
    return out


def prepare_arrays(images, input_size, norm="signed_unit"):
    """Preprocess a list of LabeledImage into (X, y) training arrays."""
    n = len(images)
    x = np.empty((n, input_size, input_size, 3), dtype=np.float32)
    y = np.empty(n, dtype=np.int64)
    for i, im in enumerate(images):
        x[i] = preprocess(im, input_size, norm)
        y[i] = LABEL_INDEX[im.label]
    return x, y


def stratified_split(images, ratio, seed):
    """Split into train/validation preserving class proportions.

    Per class, floor(ratio * class_count) images go to train and the
    remainder to validation; the within-class shuffle is a pure
    function of `seed`.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio!r}")
    by_class = {label: [] for label in CLASS_ORDER}
    for im in images:
        by_class[im.label].append(im)
    present = [label for label in CLASS_ORDER if by_class[label]]
    if len(present) < 2:
        raise StratificationError(
            "stratified split requires both classes, got only "
            + (repr(present[0]) if present else "an empty corpus"))

    rng = np.random.default_rng(seed)
    train, validation = [], []
    for label in CLASS_ORDER:
        members = sorted(by_class[label], key=lambda im: im.source_id)
        perm = rng.permutation(len(members))
        n_train = int(np.floor(ratio * len(members)))
        for j, idx in enumerate(perm):
            (train if j < n_train else validation).append(members[idx])
    train.sort(key=lambda im: im.source_id)
    validation.sort(key=lambda im: im.source_id)
    return SplitPair(train=train, validation=validation, ratio=ratio,
                     seed=seed)
