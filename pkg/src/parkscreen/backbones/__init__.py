"""Backbone registry: build, load pretrained weights, fingerprint."""

import hashlib
import importlib.resources
import json

import numpy as np

from ..errors import ConfigError, PretrainedWeightsError
from .zoo import BUILDERS

BACKBONE_IDS = tuple(BUILDERS)

_META_KEY = "__meta__"


def build_backbone(backbone_id, seed=0):
    """Construct a freshly initialized feature extractor.

    Returns (net, feature_dim). Raises ConfigError for unknown ids.
    """
    if backbone_id not in BUILDERS:
        raise ConfigError(
            f"unknown backbone {backbone_id!r}; expected one of "
            + ", ".join(BACKBONE_IDS)
        )
    rng = np.random.default_rng(seed)
    return BUILDERS[backbone_id](rng)


def params_digest(net):
    """Hex sha256 over all parameter and buffer arrays, in name order."""
    h = hashlib.sha256()
    for name, arr in sorted(net.named_arrays()):
        h.update(name.encode())
        h.update(str(arr.shape).encode())
        h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    return h.hexdigest()


def save_weights(net, path, meta):
    state = net.state()
    if _META_KEY in state:
        raise ValueError(f"state may not contain {_META_KEY}")
    blob = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), np.uint8)
    np.savez_compressed(path, **{_META_KEY: blob}, **state)


def load_weights(net, path):
    with np.load(path) as z:
        meta = json.loads(bytes(z[_META_KEY]).decode())
        state = {k: z[k] for k in z.files if k != _META_KEY}
    net.load_state(state)
    return meta


def pretrained_resource(backbone_id):
    return importlib.resources.files(__package__) / "pretrained" / (
        backbone_id + ".npz")


def load_pretrained(backbone_id):
    """Build a backbone and load its shipped pretrained weights.

    Returns (net, feature_dim, meta). Raises PretrainedWeightsError when
    the weight archive for the backbone is missing from the install.
    """
    net, feature_dim = build_backbone(backbone_id)
    res = pretrained_resource(backbone_id)
    if not res.is_file():
        raise PretrainedWeightsError(
            f"no pretrained weights installed for {backbone_id!r} "
            f"(expected {res})"
        )
    with importlib.resources.as_file(res) as path:
        meta = load_weights(net, path)
    return net, feature_dim, meta
