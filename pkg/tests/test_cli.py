import json
import subprocess
import sys

import pytest


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "parkscreen.cli", *map(str, args)],
        capture_output=True, text=True, env=env)


class TestUsageErrors:
    def test_no_command_exits_2(self):
        proc = run_cli()
        assert proc.returncode == 2

    def test_unknown_command_exits_2(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 2

    def test_unknown_backbone_exits_2_and_lists_choices(self):
        proc = run_cli("train", "--data", "/tmp/x", "--type", "spiral",
                       "--out", "/tmp/y", "--backbone", "vgg16")
        assert proc.returncode == 2
        for name in ("mobilenet_v2", "nasnet_mobile", "efficientnet_b0",
                     "resnet50", "inception_v3"):
            assert name in proc.stderr

    def test_bad_input_size_exits_2(self):
        proc = run_cli("train", "--data", "/tmp/x", "--type", "spiral",
                       "--out", "/tmp/y", "--backbone", "mobilenet_v2",
                       "--input-size", "128")
        assert proc.returncode == 2

    def test_bad_drawing_type_exits_2(self):
        proc = run_cli("augment", "--in", "/tmp/x", "--out", "/tmp/y",
                       "--type", "circle")
        assert proc.returncode == 2

    def test_predict_without_images_exits_2(self):
        proc = run_cli("predict")
        assert proc.returncode == 2

    def test_predict_image_without_bundle_exits_2(self):
        proc = run_cli("predict", "--spiral", "/tmp/whatever.png")
        assert proc.returncode == 2

    def test_missing_required_flag_exits_2(self):
        proc = run_cli("train", "--type", "spiral",
                       "--backbone", "mobilenet_v2", "--out", "/tmp/y")
        assert proc.returncode == 2


class TestRuntimeErrors:
    def test_missing_data_dir_exits_1(self, tmp_path):
        proc = run_cli("train", "--data", tmp_path / "absent",
                       "--type", "spiral", "--backbone", "mobilenet_v2",
                       "--out", tmp_path / "run")
        assert proc.returncode == 1
        assert "error:" in proc.stderr

    def test_missing_bundle_exits_1(self, tmp_path):
        png = tmp_path / "x.png"
        png.write_bytes(b"")
        proc = run_cli("predict", "--spiral", png,
                       "--spiral-bundle", tmp_path / "absent.bundle")
        assert proc.returncode == 1
        assert "error:" in proc.stderr

    def test_version_flag(self):
        proc = run_cli("--version")
        assert proc.returncode == 0


@pytest.mark.training
class TestEndToEnd:
    def test_full_workflow_small(self, tmp_path):
        corpus = tmp_path / "corpus"
        proc = run_cli("synth", "--out", corpus, "--per-class", "8",
                       "--size", "128", "--seed", "3")
        assert proc.returncode == 0, proc.stderr

        aug = tmp_path / "aug"
        proc = run_cli("augment", "--in", corpus, "--out", aug,
                       "--type", "spiral", "--count", "40", "--seed", "3")
        assert proc.returncode == 0, proc.stderr
        assert (aug / "manifest.json").is_file()

        run_dir = tmp_path / "runs" / "m_spiral"
        proc = run_cli("train", "--data", corpus, "--type", "spiral",
                       "--backbone", "mobilenet_v2", "--out", run_dir,
                       "--epochs", "2", "--input-size", "96",
                       "--augment-count", "60", "--seed", "3")
        assert proc.returncode == 0, proc.stderr
        assert (run_dir / "history.csv").is_file()
        assert (run_dir / "run.json").is_file()
        assert (run_dir / "model.npz").is_file()
        run_info = json.loads((run_dir / "run.json").read_text())
        assert run_info["config"]["backbone"] == "mobilenet_v2"

        report_dir = tmp_path / "report"
        proc = run_cli("report", "--runs", tmp_path / "runs",
                       "--out", report_dir)
        assert proc.returncode == 0, proc.stderr
        assert (report_dir / "comparison_spiral.csv").is_file()

        bundle = tmp_path / "spiral.bundle"
        proc = run_cli("export", "--run", run_dir, "--out", bundle)
        assert proc.returncode == 0, proc.stderr
        assert bundle.is_file()

        proc = run_cli("evaluate", "--bundle", bundle, "--data", corpus)
        assert proc.returncode == 0, proc.stderr
        metrics = json.loads(proc.stdout)
        assert 0.0 <= metrics["accuracy"] <= 1.0

        sample = next((corpus / "spiral" / "healthy").glob("*.png"))
        proc = run_cli("predict", "--spiral", sample,
                       "--spiral-bundle", bundle)
        assert proc.returncode == 0, proc.stderr
        verdict = json.loads(proc.stdout)
        assert verdict["label"] in ("healthy", "parkinson")
        assert verdict["winning_source"] == "spiral"

    def test_augment_count_zero_disables(self, tmp_path):
        corpus = tmp_path / "corpus"
        run_cli("synth", "--out", corpus, "--per-class", "6",
                "--size", "96", "--seed", "4")
        run_dir = tmp_path / "run"
        proc = run_cli("train", "--data", corpus, "--type", "wave",
                       "--backbone", "mobilenet_v2", "--out", run_dir,
                       "--epochs", "1", "--input-size", "96",
                       "--augment-count", "0", "--seed", "4")
        assert proc.returncode == 0, proc.stderr
        run_info = json.loads((run_dir / "run.json").read_text())
        # 12 originals, 0.8 split -> 4 healthy + 4 parkinson in train
        assert run_info["train_count"] == 8
