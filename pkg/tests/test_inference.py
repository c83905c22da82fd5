import io
import json
import zipfile

import numpy as np
import pytest
from PIL import Image

from parkscreen.errors import (
    BundleFormatError,
    BundleVersionError,
    ExportError,
    ImageDecodeError,
    InputError,
)
from parkscreen.inference import (
    BUNDLE_VERSION,
    MANIFEST_NAME,
    Prediction,
    export_bundle,
    fuse,
    load_bundle,
)
from parkscreen.training import build_classifier


@pytest.fixture(scope="module")
def bundle_path(tmp_path_factory):
    model = build_classifier("mobilenet_v2", 96, seed=0)
    path = tmp_path_factory.mktemp("bundles") / "spiral.bundle"
    export_bundle(model, "spiral", "run-001", path)
    return path


def _png_bytes(size=64, value=200):
    arr = np.full((size, size, 3), value, dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


class TestExportAndLoad:
    def test_manifest_round_trip(self, bundle_path):
        bundle = load_bundle(bundle_path)
        m = bundle.manifest
        assert m["backbone"] == "mobilenet_v2"
        assert m["drawing_type"] == "spiral"
        assert m["input_size"] == 96
        assert m["class_order"] == ["healthy", "parkinson"]
        assert m["version"] == BUNDLE_VERSION
        assert m["training_run_id"] == "run-001"
        assert bundle.drawing_type == "spiral"

    def test_export_requires_run_id_and_known_type(self, tmp_path):
        model = build_classifier("mobilenet_v2", 96, seed=0)
        with pytest.raises(ExportError):
            export_bundle(model, "circle", "r", tmp_path / "x.bundle")
        with pytest.raises(ExportError):
            export_bundle(model, "spiral", "", tmp_path / "x.bundle")

    def test_loaded_bundle_reproduces_source_model(self, bundle_path):
        model = build_classifier("mobilenet_v2", 96, seed=0)
        bundle = load_bundle(bundle_path)
        rng = np.random.default_rng(5)
        x = rng.uniform(-1, 1, size=(3, 96, 96, 3)).astype(np.float32)
        assert np.allclose(bundle.model.predict_proba(x),
                           model.predict_proba(x), atol=1e-6)

    def test_missing_file_raises_file_not_found(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_bundle(tmp_path / "absent.bundle")

    def test_truncated_bundle_is_format_error(self, bundle_path, tmp_path):
        clipped = tmp_path / "clipped.bundle"
        clipped.write_bytes(bundle_path.read_bytes()[:200])
        with pytest.raises(BundleFormatError):
            load_bundle(clipped)

    def test_newer_version_is_version_error(self, bundle_path, tmp_path):
        out = tmp_path / "newer.bundle"
        _rewrite_manifest(bundle_path, out, {"version": "2"})
        with pytest.raises(BundleVersionError):
            load_bundle(out)

    def test_missing_manifest_key_is_format_error(self, bundle_path,
                                                  tmp_path):
        out = tmp_path / "broken.bundle"
        _rewrite_manifest(bundle_path, out, drop="class_order")
        with pytest.raises(BundleFormatError):
            load_bundle(out)

    def test_wrong_class_order_is_format_error(self, bundle_path, tmp_path):
        out = tmp_path / "classes.bundle"
        _rewrite_manifest(bundle_path, out,
                          {"class_order": ["parkinson", "healthy"]})
        with pytest.raises(BundleFormatError):
            load_bundle(out)


def _rewrite_manifest(src, dst, patch=None, drop=None):
    with zipfile.ZipFile(src) as zin:
        manifest = json.loads(zin.read(MANIFEST_NAME))
        rest = {n: zin.read(n) for n in zin.namelist() if n != MANIFEST_NAME}
    if patch:
        manifest.update(patch)
    if drop:
        manifest.pop(drop, None)
    with zipfile.ZipFile(dst, "w") as zout:
        zout.writestr(MANIFEST_NAME, json.dumps(manifest))
        for name, blob in rest.items():
            zout.writestr(name, blob)


class TestPredict:
    def test_probabilities_normalized_and_deterministic(self, bundle_path):
        bundle = load_bundle(bundle_path)
        payload = _png_bytes()
        a = bundle.predict(payload)
        b = bundle.predict(payload)
        assert a.drawing_type == "spiral"
        assert a.p_healthy == b.p_healthy
        assert a.p_parkinson == b.p_parkinson
        assert 0.0 <= a.p_healthy <= 1.0
        assert a.p_healthy + a.p_parkinson == pytest.approx(1.0, abs=1e-6)

    def test_undecodable_bytes_rejected(self, bundle_path):
        bundle = load_bundle(bundle_path)
        with pytest.raises(ImageDecodeError):
            bundle.predict(b"definitely not an image")

    def test_grayscale_png_accepted(self, bundle_path):
        bundle = load_bundle(bundle_path)
        arr = np.full((50, 50), 128, dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr, mode="L").save(buf, format="PNG")
        pred = bundle.predict(buf.getvalue())
        assert pred.p_healthy + pred.p_parkinson == pytest.approx(1.0,
                                                                  abs=1e-6)


def _pred(drawing_type, p_parkinson):
    return Prediction(drawing_type=drawing_type,
                      p_healthy=1.0 - p_parkinson,
                      p_parkinson=p_parkinson)


class TestFuse:
    def test_spiral_wins_when_it_has_the_global_max(self):
        out = fuse(_pred("spiral", 0.9), _pred("wave", 0.2))
        assert out.label == "parkinson"
        assert out.confidence == pytest.approx(0.9)
        assert out.winning_source == "spiral"

    def test_wave_healthy_wins(self):
        out = fuse(_pred("spiral", 0.45), _pred("wave", 0.05))
        assert out.label == "healthy"
        assert out.confidence == pytest.approx(0.95)
        assert out.winning_source == "wave"

    def test_tie_prefers_parkinson_then_spiral(self):
        # equal max probability on both classes -> parkinson wins
        out = fuse(_pred("spiral", 0.5), _pred("wave", 0.5))
        assert out.label == "parkinson"
        assert out.winning_source == "spiral"
        # equal parkinson probability across sources -> spiral wins
        out = fuse(_pred("spiral", 0.8), _pred("wave", 0.8))
        assert out.label == "parkinson"
        assert out.winning_source == "spiral"
        # equal healthy probability across sources -> spiral wins
        out = fuse(_pred("spiral", 0.1), _pred("wave", 0.1))
        assert out.label == "healthy"
        assert out.winning_source == "spiral"

    def test_single_input_passthrough(self):
        out = fuse(_pred("spiral", 0.7), None)
        assert out.label == "parkinson"
        assert out.winning_source == "spiral"
        assert out.wave is None
        out = fuse(None, _pred("wave", 0.1))
        assert out.label == "healthy"
        assert out.winning_source == "wave"
        assert out.spiral is None

    def test_both_missing_rejected(self):
        with pytest.raises(InputError):
            fuse(None, None)

    def test_grid_oracle_brute_force(self):
        # exhaustive check on a 0.05 grid against a direct argmax model
        grid = np.round(np.arange(0.0, 1.0001, 0.05), 2)
        for ps in grid:
            for pw in grid:
                spiral, wave = _pred("spiral", ps), _pred("wave", pw)
                out = fuse(spiral, wave)
                candidates = [
                    ("parkinson", "spiral", spiral.p_parkinson),
                    ("parkinson", "wave", wave.p_parkinson),
                    ("healthy", "spiral", spiral.p_healthy),
                    ("healthy", "wave", wave.p_healthy),
                ]
                best = max(candidates, key=lambda c: c[2])
                # max with priority ordering on exact ties
                expect = next(c for c in candidates
                              if c[2] == best[2])
                assert (out.label, out.winning_source) == expect[:2], \
                    f"ps={ps} pw={pw}"
                assert out.confidence == pytest.approx(expect[2])

    def test_confidence_monotone_in_winning_probability(self):
        lo = fuse(_pred("spiral", 0.6), _pred("wave", 0.3))
        hi = fuse(_pred("spiral", 0.8), _pred("wave", 0.3))
        assert hi.confidence > lo.confidence

    def test_result_carries_both_predictions(self):
        s, w = _pred("spiral", 0.7), _pred("wave", 0.6)
        out = fuse(s, w)
        assert out.spiral is s
        assert out.wave is w
