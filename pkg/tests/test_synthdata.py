import numpy as np

from parkscreen import synthdata
from parkscreen.dataset import load_dataset


def test_generation_is_deterministic():
    a = synthdata.generate_image("spiral", "parkinson",
                                 np.random.default_rng([5, 1]), 128)
    b = synthdata.generate_image("spiral", "parkinson",
                                 np.random.default_rng([5, 1]), 128)
    assert np.array_equal(a, b)


def test_image_shape_and_palette():
    img = synthdata.generate_image("wave", "healthy",
                                   np.random.default_rng(0), 160)
    assert img.shape == (160, 160, 3)
    assert img.dtype == np.uint8
    gray = img.mean(axis=2)
    # white paper dominates, but the pen stroke is present
    assert (gray > 230).mean() > 0.80
    assert (gray < 128).any()


def test_severity_distributions_are_ordered_but_overlap():
    rng = np.random.default_rng(123)
    healthy = [synthdata.sample_severity(rng, "healthy") for _ in range(4000)]
    parkinson = [synthdata.sample_severity(rng, "parkinson")
                 for _ in range(4000)]
    assert np.mean(healthy) < np.mean(parkinson)
    # deliberate ambiguity: the supports cross
    boundary = (np.mean(healthy) + np.mean(parkinson)) / 2
    assert max(healthy) > min(parkinson)
    assert (np.asarray(parkinson) < boundary).any()


def test_parkinson_strokes_carry_more_ink():
    # tremor lengthens and roughens the pen path, so on average the
    # stroke covers more pixels at equal stroke width
    def ink(drawing_type, label, i):
        img = synthdata.generate_image(
            drawing_type, label, np.random.default_rng([7, i]), 192)
        return (img.mean(axis=2) < 128).mean()

    for drawing_type in ("spiral", "wave"):
        h = np.mean([ink(drawing_type, "healthy", i) for i in range(10)])
        p = np.mean([ink(drawing_type, "parkinson", i) for i in range(10)])
        assert p > h


def test_corpus_tree_loads_back(tmp_path):
    summary = synthdata.generate_corpus(tmp_path, per_class=3, size=96,
                                        seed=9)
    assert summary == {
        "spiral": {"healthy": 3, "parkinson": 3},
        "wave": {"healthy": 3, "parkinson": 3},
    }
    for drawing_type in ("spiral", "wave"):
        images, loaded = load_dataset(tmp_path, drawing_type)
        assert loaded.total == 6
        assert loaded.count_healthy == loaded.count_parkinson == 3
        assert all(im.pixels.shape == (96, 96, 3) for im in images)


def test_corpus_is_a_pure_function_of_seed(tmp_path):
    synthdata.generate_corpus(tmp_path / "a", per_class=2, size=96, seed=4,
                              types=("spiral",))
    synthdata.generate_corpus(tmp_path / "b", per_class=2, size=96, seed=4,
                              types=("spiral",))
    files_a = sorted((tmp_path / "a").rglob("*.png"))
    files_b = sorted((tmp_path / "b").rglob("*.png"))
    assert [p.name for p in files_a] == [p.name for p in files_b]
    for pa, pb in zip(files_a, files_b):
        assert pa.read_bytes() == pb.read_bytes()
