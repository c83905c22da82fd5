"""Portable model bundles, single-image prediction and verdict fusion.

A bundle is one zip archive holding `manifest.json` (backbone id,
drawing type, input size, class order, normalization, format version,
training run id) and `weights.npz` (all backbone and head arrays). It
is self-contained: loading needs only this package, never the training
artifacts. Export performs a parity self-check so a written bundle is
known to reproduce its source model.
"""

import io
import json
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import CLASS_ORDER, nn
from .backbones import BACKBONE_IDS, build_backbone
from .dataset import INPUT_SIZES, NORMS, preprocess
from .errors import (
    BundleFormatError,
    BundleVersionError,
    ExportError,
    ImageDecodeError,
    InputError,
)
from .training import ModelHandle, _make_head

BUNDLE_VERSION = "1"
MANIFEST_NAME = "manifest.json"
WEIGHTS_NAME = "weights.npz"
REQUIRED_MANIFEST_KEYS = ("backbone", "drawing_type", "input_size",
                          "class_order", "norm", "version",
                          "training_run_id")


@dataclass(frozen=True)
class Prediction:
    drawing_type: str
    p_healthy: float
    p_parkinson: float

    def probs(self):
        return {"healthy": self.p_healthy, "parkinson": self.p_parkinson}


@dataclass(frozen=True)
class FusionResult:
    label: str
    confidence: float
    winning_source: str
    spiral: Prediction = None
    wave: Prediction = None


class ModelBundle:
    """A loaded bundle: immutable manifest + ready-to-predict model."""

    def __init__(self, manifest, model):
        self.manifest = manifest
        self.model = model

    @property
    def drawing_type(self):
        return self.manifest["drawing_type"]

    @property
    def run_id(self):
        return self.manifest["training_run_id"]

    def predict_array(self, pixels):
        """Prediction for one decoded H×W×3 uint8 raster."""
        x = preprocess(pixels, self.manifest["input_size"],
                       self.manifest["norm"])[None]
        probs = self.model.predict_proba(x)[0]
        return Prediction(
            drawing_type=self.drawing_type,
            p_healthy=float(probs[0]),
            p_parkinson=float(probs[1]),
        )

    def predict(self, image_bytes):
        """Prediction for raw PNG/JPEG bytes."""
        try:
            with Image.open(io.BytesIO(image_bytes)) as im:
                pixels = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise ImageDecodeError(f"cannot decode image: {exc}") from exc
        return self.predict_array(pixels)


def _validate_manifest(manifest):
    missing = [k for k in REQUIRED_MANIFEST_KEYS if manifest.get(k) in
               (None, "")]
    if missing:
        raise BundleFormatError(
            "manifest missing required fields: " + ", ".join(missing))
    if manifest["version"] != BUNDLE_VERSION:
        raise BundleVersionError(
            f"bundle format version {manifest['version']!r} is not "
            f"supported (this build reads version {BUNDLE_VERSION!r})")
    if list(manifest["class_order"]) != list(CLASS_ORDER):
        raise BundleFormatError(
            f"unexpected class order {manifest['class_order']!r}")
    if manifest["backbone"] not in BACKBONE_IDS:
        raise BundleFormatError(
            f"unknown backbone {manifest['backbone']!r}")
    if manifest["input_size"] not in INPUT_SIZES:
        raise BundleFormatError(
            f"unsupported input size {manifest['input_size']!r}")
    if manifest["norm"] not in NORMS:
        raise BundleFormatError(f"unknown norm {manifest['norm']!r}")


def export_bundle(model, drawing_type, training_run_id, out_path,
                  parity_images=None):
    """Write `model` as a self-contained bundle at out_path.

    A parity self-check runs before returning: the written file is
    loaded back and must reproduce the source model's probabilities
    (max deviation 1e-6 on synthetic probes, since weights round-trip
    losslessly). `parity_images` may supply decoded uint8 rasters to
    use as probes instead of random noise.
    """
    if not drawing_type:
        raise ExportError("manifest field drawing_type is required")
    if drawing_type not in ("spiral", "wave"):
        raise ExportError(f"unknown drawing_type {drawing_type!r}")
    if not training_run_id:
        raise ExportError("manifest field training_run_id is required")

    manifest = {
        "backbone": model.backbone_id,
        "drawing_type": drawing_type,
        "input_size": model.input_size,
        "class_order": list(CLASS_ORDER),
        "norm": model.norm,
        "version": BUNDLE_VERSION,
        "training_run_id": training_run_id,
    }
    _validate_manifest(manifest)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.BytesIO()
    np.savez_compressed(buf, **model.state())
    with zipfile.ZipFile(out_path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(MANIFEST_NAME, json.dumps(manifest, indent=1))
        zf.writestr(WEIGHTS_NAME, buf.getvalue())

    reloaded = load_bundle(out_path)
    if parity_images is None:
        rng = np.random.default_rng(0)
        size = model.input_size
        parity_images = rng.integers(0, 256, size=(4, size, size, 3),
                                     dtype=np.uint8)
    worst = 0.0
    for pixels in parity_images:
        a = reloaded.predict_array(pixels)
        b_probs = model.predict_proba(
            preprocess(pixels, model.input_size, model.norm)[None])[0]
        worst = max(worst,
                    abs(a.p_healthy - float(b_probs[0])),
                    abs(a.p_parkinson - float(b_probs[1])))
    if worst > 1e-6:
        raise ExportError(
            f"bundle parity self-check failed: deviation {worst:.3g}")
    return out_path


def load_bundle(path):
    """Open, validate and reconstruct a bundle written by export_bundle."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"bundle not found: {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            names = set(zf.namelist())
            if MANIFEST_NAME not in names or WEIGHTS_NAME not in names:
                raise BundleFormatError(
                    f"bundle missing {MANIFEST_NAME} or {WEIGHTS_NAME}")
            manifest = json.loads(zf.read(MANIFEST_NAME).decode())
            weights_blob = zf.read(WEIGHTS_NAME)
    except zipfile.BadZipFile as exc:
        raise BundleFormatError(f"not a valid bundle archive: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"corrupt bundle manifest: {exc}") from exc

    _validate_manifest(manifest)
    net, feature_dim = build_backbone(manifest["backbone"])
    head = _make_head(feature_dim, seed=0)
    model = ModelHandle(manifest["backbone"], int(manifest["input_size"]),
                        manifest["norm"], net, feature_dim, head)
    try:
        with np.load(io.BytesIO(weights_blob)) as z:
            state = {k: z[k] for k in z.files}
        model.load_state(state)
    except (ValueError, KeyError, OSError) as exc:
        raise BundleFormatError(
            f"bundle weights do not match its manifest: {exc}") from exc
    return ModelBundle(manifest, model)


# Tie-break order for fusion: parkinson beats healthy (screening errs
# toward follow-up), spiral beats wave.
_FUSION_PRIORITY = (("parkinson", "spiral"), ("parkinson", "wave"),
                    ("healthy", "spiral"), ("healthy", "wave"))


def fuse(spiral=None, wave=None):
    """Final verdict: the single highest class probability wins."""
    if spiral is None and wave is None:
        raise InputError("fuse needs at least one prediction")
    available = {}
    if spiral is not None:
        available["spiral"] = spiral
    if wave is not None:
        available["wave"] = wave

    best = None
    for label, source in _FUSION_PRIORITY:
        pred = available.get(source)
        if pred is None:
            continue
        value = pred.p_parkinson if label == "parkinson" else pred.p_healthy
        if best is None or value > best[0]:
            best = (value, label, source)
    confidence, label, source = best
    return FusionResult(
        label=label,
        confidence=float(confidence),
        winning_source=source,
        spiral=spiral,
        wave=wave,
    )
