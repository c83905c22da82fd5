"""Acceptance gate for the screening pipeline.

Each test prints exactly one line — ``ACCEPTANCE <criterion>: PASS`` or
``... : FAIL`` — directly to the terminal (bypassing capture), then
asserts. Criteria 1–4 share one synthetic corpus and four training runs
(two backbones × two drawing types, all seed 42); criterion 5 is the
fast property battery and must finish without any training; criterion 6
is the reduced CI smoke profile with its wall-clock budget.
"""

import hashlib
import time

import numpy as np
import pytest

from parkscreen import synthdata
from parkscreen.augmentation import AugmentationSpec, augment_set, parent_of
from parkscreen.backbones import BACKBONE_IDS
from parkscreen.dataset import LabeledImage, preprocess, stratified_split
from parkscreen.inference import Prediction, export_bundle, fuse, load_bundle
from parkscreen.nn import softmax
from parkscreen.pipeline import prepare_split, train_pipeline
from parkscreen.training import (
    TrainingConfig,
    build_classifier,
    early_stop_check,
)

SEED = 42
INPUT_SIZE = 224
AUGMENT_COUNT = 1000

SPIRAL_BAR = 0.90
WAVE_BAR = 0.87
DEPLOYED_BAND = (0.88, 0.98)
PROPERTY_BUDGET_S = 300.0
SMOKE_BAR = 0.80
SMOKE_BUDGET_S = 1200.0


def _config(backbone, drawing_type, **over):
    base = dict(backbone=backbone, drawing_type=drawing_type, epochs=100,
                patience=3, input_size=INPUT_SIZE, batch_size=32,
                learning_rate=1e-3, split_ratio=0.8, seed=SEED)
    base.update(over)
    return TrainingConfig(**base)


@pytest.fixture(scope="module")
def corpus_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance_corpus")
    synthdata.generate_corpus(root, per_class=51, size=256, seed=SEED)
    return root


@pytest.fixture(scope="module")
def runs(corpus_root):
    out = {}
    for backbone in ("mobilenet_v2", "resnet50"):
        for drawing_type in ("spiral", "wave"):
            cfg = _config(backbone, drawing_type)
            out[(backbone, drawing_type)] = train_pipeline(
                corpus_root, cfg, augment_count=AUGMENT_COUNT)
    return out


@pytest.fixture
def announce(capsys):
    def _announce(name, ok):
        with capsys.disabled():
            print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}",
                  flush=True)
        return ok
    return _announce


def _best(runs, backbone, drawing_type):
    return max(runs[(backbone, drawing_type)].history.val_accuracies())


@pytest.mark.training
def test_criterion_spiral_accuracy(runs, announce):
    acc = _best(runs, "mobilenet_v2", "spiral")
    assert announce(f"spiral_accuracy (mobilenet_v2 {acc:.4f} >= "
                    f"{SPIRAL_BAR})", acc >= SPIRAL_BAR)


@pytest.mark.training
def test_criterion_wave_accuracy(runs, announce):
    acc = _best(runs, "mobilenet_v2", "wave")
    assert announce(f"wave_accuracy (mobilenet_v2 {acc:.4f} >= {WAVE_BAR})",
                    acc >= WAVE_BAR)


@pytest.mark.training
def test_criterion_backbone_ordering(runs, announce):
    mv_s = _best(runs, "mobilenet_v2", "spiral")
    rn_s = _best(runs, "resnet50", "spiral")
    mv_w = _best(runs, "mobilenet_v2", "wave")
    rn_w = _best(runs, "resnet50", "wave")
    ok = mv_s > rn_s and mv_w > rn_w
    assert announce(
        f"backbone_ordering (spiral {mv_s:.4f} > {rn_s:.4f}, "
        f"wave {mv_w:.4f} > {rn_w:.4f})", ok)


@pytest.mark.training
def test_criterion_deployed_bundle_accuracy(runs, corpus_root, announce,
                                            tmp_path):
    # deployment path: export -> reload -> per-image predict on the
    # same validation members the run scored (prepare_split is a pure
    # function of corpus + config, so the split reproduces exactly)
    accuracies = []
    for drawing_type in ("spiral", "wave"):
        result = runs[("mobilenet_v2", drawing_type)]
        bundle_path = tmp_path / f"{drawing_type}.bundle"
        export_bundle(result.model, drawing_type, result.run_id,
                      bundle_path)
        bundle = load_bundle(bundle_path)
        _, val_imgs, _ = prepare_split(
            corpus_root, result.config, AUGMENT_COUNT)
        correct = 0
        for im in val_imgs:
            pred = bundle.predict_array(im.pixels)
            verdict = ("parkinson" if pred.p_parkinson > pred.p_healthy
                       else "healthy")
            correct += verdict == im.label
        accuracies.append(correct / len(val_imgs))
    mean = float(np.mean(accuracies))
    lo, hi = DEPLOYED_BAND
    assert announce(
        f"deployed_bundle_accuracy (mean {mean:.4f} in [{lo}, {hi}])",
        lo <= mean <= hi)


def test_criterion_property_battery(announce, tmp_path):
    t0 = time.monotonic()

    # fusion: exhaustive 0.05-grid agreement with a direct
    # priority-ordered argmax model
    grid = np.round(np.arange(0.0, 1.0001, 0.05), 2)
    for ps in grid:
        for pw in grid:
            spiral = Prediction("spiral", 1.0 - ps, ps)
            wave = Prediction("wave", 1.0 - pw, pw)
            out = fuse(spiral, wave)
            candidates = [
                ("parkinson", "spiral", spiral.p_parkinson),
                ("parkinson", "wave", wave.p_parkinson),
                ("healthy", "spiral", spiral.p_healthy),
                ("healthy", "wave", wave.p_healthy),
            ]
            top = max(c[2] for c in candidates)
            label, source, conf = next(c for c in candidates
                                       if c[2] == top)
            assert (out.label, out.winning_source) == (label, source)
            assert abs(out.confidence - conf) < 1e-12

    # augmentation: exact count, label preservation, parent lineage,
    # byte-level determinism
    originals = []
    for i in range(6):
        label = "healthy" if i % 2 == 0 else "parkinson"
        img = synthdata.generate_image(
            "spiral", label, np.random.default_rng([900, i]), 96)
        originals.append(LabeledImage(img, "spiral", label,
                                      f"{label}_{i:03d}"))
    spec = AugmentationSpec(target_count=64, seed=11)
    parents = {im.source_id: im.label for im in originals}

    def corpus_digest(items):
        h = hashlib.sha256()
        for im in sorted(items, key=lambda im: im.source_id):
            h.update(im.source_id.encode())
            h.update(im.pixels.tobytes())
        return h.hexdigest()

    out_a = augment_set(originals, spec)
    out_b = augment_set(originals, spec)
    assert len(out_a) == 64
    assert corpus_digest(out_a) == corpus_digest(out_b)
    for im in out_a:
        assert im.label == parents[parent_of(im.source_id)]

    # stratified split invariants across 200 random instances
    rng = np.random.default_rng(77)
    blank = np.zeros((48, 48, 3), dtype=np.uint8)
    for _ in range(200):
        n_h = int(rng.integers(2, 50))
        n_p = int(rng.integers(2, 50))
        ratio = float(rng.uniform(0.05, 0.95))
        seed = int(rng.integers(0, 100_000))
        imgs = (
            [LabeledImage(blank, "wave", "healthy", f"h{i:04d}")
             for i in range(n_h)]
            + [LabeledImage(blank, "wave", "parkinson", f"p{i:04d}")
               for i in range(n_p)])
        pair = stratified_split(imgs, ratio, seed=seed)
        train_ids = {im.source_id for im in pair.train}
        val_ids = {im.source_id for im in pair.validation}
        assert not (train_ids & val_ids)
        assert len(train_ids) + len(val_ids) == n_h + n_p
        got_h = sum(1 for im in pair.train if im.label == "healthy")
        got_p = sum(1 for im in pair.train if im.label == "parkinson")
        assert got_h == int(np.floor(ratio * n_h))
        assert got_p == int(np.floor(ratio * n_p))

    # softmax output is a probability vector and shift-invariant
    logits = rng.normal(0, 5, size=(256, 2))
    probs = softmax(logits)
    assert np.all(probs >= 0.0) and np.all(probs <= 1.0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
    assert np.allclose(softmax(logits + 3.7), probs, atol=1e-6)

    # early stopping agrees with the direct window formulation
    for _ in range(200):
        trace = list(np.round(rng.uniform(0.4, 1.0,
                                          size=rng.integers(1, 12)), 2))
        patience = int(rng.integers(1, 5))
        n = len(trace)
        stopped = n >= patience and all(
            i > 0 and trace[i] <= max(trace[:i])
            for i in range(n - patience, n))
        assert early_stop_check(trace, patience) is stopped

    # export parity: every backbone round-trips through a bundle within
    # 1e-3 on a 50-image fixture set
    fixture = []
    for i in range(50):
        label = "healthy" if i % 2 == 0 else "parkinson"
        fixture.append(synthdata.generate_image(
            "spiral", label, np.random.default_rng([901, i]), 96))
    fixture = np.stack(fixture)
    for backbone in BACKBONE_IDS:
        model = build_classifier(backbone, 96, seed=0)
        path = tmp_path / f"parity_{backbone}.bundle"
        export_bundle(model, "spiral", "parity-check", path,
                      parity_images=fixture)
        bundle = load_bundle(path)
        for pixels in fixture:
            x = preprocess(pixels, 96, model.norm)[None]
            want = model.predict_proba(x)[0]
            got = bundle.predict_array(pixels)
            assert abs(got.p_healthy - want[0]) <= 1e-3
            assert abs(got.p_parkinson - want[1]) <= 1e-3

    elapsed = time.monotonic() - t0
    assert announce(
        f"property_battery ({elapsed:.1f}s < {PROPERTY_BUDGET_S:.0f}s, "
        f"no training)", elapsed < PROPERTY_BUDGET_S)


@pytest.mark.training
def test_criterion_ci_smoke(corpus_root, announce):
    t0 = time.monotonic()
    cfg = _config("mobilenet_v2", "spiral", epochs=10, input_size=96)
    result = train_pipeline(corpus_root, cfg, augment_count=2000)
    elapsed = time.monotonic() - t0
    acc = max(result.history.val_accuracies())
    ok = acc >= SMOKE_BAR and elapsed <= SMOKE_BUDGET_S
    assert announce(
        f"ci_smoke (96px/10ep: {acc:.4f} >= {SMOKE_BAR}, "
        f"{elapsed:.0f}s <= {SMOKE_BUDGET_S:.0f}s)", ok)
