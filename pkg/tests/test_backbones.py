import numpy as np
import pytest

from parkscreen.backbones import (
    BACKBONE_IDS,
    build_backbone,
    load_pretrained,
    params_digest,
    pretrained_resource,
    save_weights,
    load_weights,
)
from parkscreen.errors import ConfigError, PretrainedWeightsError

EXPECTED_IDS = ("mobilenet_v2", "nasnet_mobile", "efficientnet_b0",
                "resnet50", "inception_v3")


def test_registry_has_exactly_the_five_backbones():
    assert set(BACKBONE_IDS) == set(EXPECTED_IDS)
    assert len(BACKBONE_IDS) == 5


def test_unknown_backbone_rejected():
    with pytest.raises(ConfigError, match="vgg16"):
        build_backbone("vgg16")


@pytest.mark.parametrize("backbone_id", EXPECTED_IDS)
def test_output_shapes_across_input_sizes(backbone_id):
    net, feature_dim = build_backbone(backbone_id, seed=0)
    for size, spatial in ((96, 3), (160, 5), (224, 7)):
        y = net(np.zeros((1, size, size, 3), np.float32))
        assert y.shape == (1, spatial, spatial, feature_dim)


@pytest.mark.parametrize("backbone_id", EXPECTED_IDS)
def test_build_is_deterministic_per_seed(backbone_id):
    a, _ = build_backbone(backbone_id, seed=3)
    b, _ = build_backbone(backbone_id, seed=3)
    c, _ = build_backbone(backbone_id, seed=4)
    assert params_digest(a) == params_digest(b)
    assert params_digest(a) != params_digest(c)


def test_digest_sensitive_to_any_array():
    net, _ = build_backbone("mobilenet_v2", seed=0)
    before = params_digest(net)
    p = net.params()[0]
    p.val.flat[0] += 1e-3
    assert params_digest(net) != before


@pytest.mark.parametrize("backbone_id", EXPECTED_IDS)
def test_pretrained_weights_ship_and_load(backbone_id):
    net, feature_dim, meta = load_pretrained(backbone_id)
    assert meta["backbone"] == backbone_id
    assert meta["norm"] == "signed_unit"
    # the meta digest pins the shipped arrays exactly
    assert params_digest(net) == meta["digest"]
    # loading twice gives the identical network
    net2, _, _ = load_pretrained(backbone_id)
    assert params_digest(net2) == params_digest(net)


def test_missing_weights_is_an_environment_error(monkeypatch, tmp_path):
    import parkscreen.backbones as bb

    monkeypatch.setattr(
        bb, "pretrained_resource",
        lambda backbone_id: tmp_path / f"{backbone_id}.npz")
    with pytest.raises(PretrainedWeightsError, match="mobilenet_v2"):
        bb.load_pretrained("mobilenet_v2")


def test_weights_roundtrip_through_npz(tmp_path):
    net, _ = build_backbone("mobilenet_v2", seed=5)
    path = tmp_path / "w.npz"
    save_weights(net, path, {"note": "test"})
    other, _ = build_backbone("mobilenet_v2", seed=6)
    assert params_digest(other) != params_digest(net)
    meta = load_weights(other, path)
    assert meta == {"note": "test"}
    assert params_digest(other) == params_digest(net)


def test_pretrained_resources_are_package_data():
    for backbone_id in EXPECTED_IDS:
        assert pretrained_resource(backbone_id).is_file()
