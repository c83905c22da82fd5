"""Geometric corpus expansion: rotation, zoom and flips.

Every generated image is produced by one affine warp (rotation about
the center, isotropic zoom, optional horizontal/vertical flip) with
exposed regions filled white. Outputs carry provenance: the parent
source_id plus the sampled transform parameters. Generation is
deterministic — output index k of class c is drawn from its own RNG
stream keyed (seed, c, k) — so the full output is a pure function of
the input corpus and the spec.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import CLASS_ORDER
from .dataset import LabeledImage
from .errors import ConfigError, InputError
from .kernels import ops


@dataclass(frozen=True)
class AugmentationSpec:
    """Transform ranges plus the output contract (count, seed).

    rotation_degrees r means angles are sampled from [-r, +r]; zoom
    factors come from [zoom_lo, zoom_hi] which must bracket 1.
    """

    rotation_degrees: float = 25.0
    zoom_lo: float = 0.85
    zoom_hi: float = 1.15
    allow_hflip: bool = True
    allow_vflip: bool = True
    target_count: int = 1000
    seed: int = 42

    def validate(self):
        if self.rotation_degrees < 0:
            raise ConfigError("rotation_degrees must be >= 0")
        if not (0.0 < self.zoom_lo <= 1.0 <= self.zoom_hi):
            raise ConfigError(
                "zoom range must satisfy 0 < lo <= 1 <= hi, got "
                f"[{self.zoom_lo}, {self.zoom_hi}]")
        if self.target_count < 1:
            raise ConfigError("target_count must be >= 1")


@dataclass(frozen=True)
class TransformParams:
    angle: float
    zoom: float
    hflip: bool
    vflip: bool

    def describe(self):
        return (f"rot={self.angle:+.2f},zoom={self.zoom:.3f},"
                f"hflip={int(self.hflip)},vflip={int(self.vflip)}")


def sample_params(spec, draw):
    """Sample one transform. Order is fixed: angle, zoom, hflip, vflip."""
    angle = float(draw.uniform(-spec.rotation_degrees, spec.rotation_degrees))
    zoom = float(draw.uniform(spec.zoom_lo, spec.zoom_hi))
    hflip = bool(draw.random() < 0.5) if spec.allow_hflip else False
    vflip = bool(draw.random() < 0.5) if spec.allow_vflip else False
    return TransformParams(angle, zoom, hflip, vflip)


def apply_transform(pixels, params):
    """Warp HxWx3 uint8 pixels about the image center, white fill."""
    h, w = pixels.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    rad = np.deg2rad(params.angle)
    cos_a, sin_a = np.cos(rad), np.sin(rad)
    rot = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
    flip = np.diag([-1.0 if params.hflip else 1.0,
                    -1.0 if params.vflip else 1.0])
    fwd = rot @ (params.zoom * flip)
    inv2 = np.linalg.inv(fwd)
    center = np.array([cx, cy])
    inv = np.empty((2, 3), dtype=np.float64)
    inv[:, :2] = inv2
    inv[:, 2] = center - inv2 @ center
    return ops.affine_warp_u8(pixels, inv, 255)


def random_transform(image, spec, draw):
    """One augmented copy of `image`; geometry, label, type preserved."""
    spec.validate()
    params = sample_params(spec, draw)
    return LabeledImage(
        pixels=apply_transform(image.pixels, params),
        drawing_type=image.drawing_type,
        label=image.label,
        source_id=f"{image.source_id}#{params.describe()}",
    )


def _quotas(class_sizes, target):
    total = sum(class_sizes.values())
    quotas = {label: target * n // total for label, n in class_sizes.items()}
    leftover = target - sum(quotas.values())
    cycle = [label for label in CLASS_ORDER if class_sizes.get(label)]
    i = 0
    while leftover > 0:
        quotas[cycle[i % len(cycle)]] += 1
        i += 1
        leftover -= 1
    return quotas


def augment_set(images, spec):
    """Expand `images` to exactly spec.target_count labeled outputs.

    Originals are part of the output; each class receives a share of
    the target proportional to its share of the input (remainders
    round-robin over class order). Output k generated for a class is
    warped from parent k mod class-size under RNG stream
    (seed, class index, k).
    """
    spec.validate()
    if not images:
        raise InputError("augment_set needs a nonempty corpus")
    types = sorted({im.drawing_type for im in images})
    if len(types) != 1:
        raise InputError(f"mixed drawing types in one corpus: {types}")
    if spec.target_count < len(images):
        raise ConfigError(
            f"target_count {spec.target_count} is smaller than the "
            f"input corpus ({len(images)} images)")

    by_class = {label: [im for im in images if im.label == label]
                for label in CLASS_ORDER}
    sizes = {label: len(g) for label, g in by_class.items() if g}
    quotas = _quotas(sizes, spec.target_count)

    out = []
    for class_idx, label in enumerate(CLASS_ORDER):
        members = by_class[label]
        if not members:
            continue
        out.extend(members)
        for k in range(quotas[label] - len(members)):
            parent = members[k % len(members)]
            draw = np.random.default_rng([spec.seed, class_idx, k])
            params = sample_params(spec, draw)
            out.append(LabeledImage(
                pixels=apply_transform(parent.pixels, params),
                drawing_type=parent.drawing_type,
                label=parent.label,
                source_id=f"{parent.source_id}#{k:05d}:{params.describe()}",
            ))
    return out


def parent_of(source_id):
    """Original corpus file an (augmented) image descends from."""
    return source_id.split("#", 1)[0]


def save_augmented(images, out_dir):
    """Write an augmented corpus as a loadable tree plus manifest.json."""
    out_dir = Path(out_dir)
    entries = []
    for i, im in enumerate(images):
        rel = Path(im.drawing_type) / im.label / f"{i:05d}.png"
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(im.pixels).save(path)
        sid = im.source_id
        entries.append({
            "file": rel.as_posix(),
            "parent": parent_of(sid),
            "transform": sid.split("#", 1)[1] if "#" in sid else None,
        })
    manifest = out_dir / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=1))
    return manifest
