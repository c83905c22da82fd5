"""The five supported convolutional feature extractors.

Compact renditions of the five architecture families, sized for CPU
inference but keeping each family's signature structure: inverted
residuals with ReLU6 (mobilenet_v2), deep 7x7-stem bottleneck residuals
(resnet50), parallel-branch modules (inception_v3), squeeze-excite MBConv
with swish (efficientnet_b0) and separable-conv cell pairs
(nasnet_mobile). Each builder returns (feature_net, feature_dim); the
net maps (N, S, S, 3) to a feature map consumed by global average
pooling in the classifier head.
"""

import numpy as np

from .. import nn


def _conv_bn(cin, cout, k, stride, act, rng, pad="same"):
    m = [nn.Conv2D(cin, cout, k, stride=stride, pad=pad, rng=rng),
         nn.BatchNorm2D(cout)]
    if act is not None:
        m.append(act())
    return m


def build_mobilenet_v2(rng):
    def inverted_residual(cin, cout, expand, stride):
        mid = cin * expand
        body = []
        if expand != 1:
            body += _conv_bn(cin, mid, 1, 1, nn.ReLU6, rng)
        body += [nn.DepthwiseConv2D(mid, 3, stride=stride, rng=rng),
                 nn.BatchNorm2D(mid), nn.ReLU6()]
        body += _conv_bn(mid, cout, 1, 1, None, rng)
        seq = nn.Sequential(body)
        if stride == 1 and cin == cout:
            return nn.Residual(seq)
        return seq

    layers = _conv_bn(3, 12, 3, 2, nn.ReLU6, rng)
    spec = [(1, 12, 1), (4, 16, 2), (4, 16, 1), (4, 24, 2), (4, 24, 1),
            (4, 32, 2), (4, 32, 1), (4, 48, 2)]
    cin = 12
    for expand, cout, stride in spec:
        layers.append(inverted_residual(cin, cout, expand, stride))
        cin = cout
    layers += _conv_bn(cin, 96, 1, 1, nn.ReLU6, rng)
    return nn.Sequential(layers), 96


def build_resnet50(rng):
    def bottleneck(cin, c, stride):
        cout = 4 * c
        body = nn.Sequential(
            _conv_bn(cin, c, 1, 1, nn.ReLU, rng)
            + _conv_bn(c, c, 3, stride, nn.ReLU, rng)
            + _conv_bn(c, cout, 1, 1, None, rng)
        )
        if stride != 1 or cin != cout:
            proj = nn.Sequential(_conv_bn(cin, cout, 1, stride, None, rng))
            return nn.Sequential([nn.Residual(body, proj), nn.ReLU()])
        return nn.Sequential([nn.Residual(body), nn.ReLU()])

    layers = _conv_bn(3, 16, 7, 2, nn.ReLU, rng) + [nn.MaxPool2D(3, 2)]
    cin = 16
    for c, blocks, stride in [(16, 2, 1), (24, 2, 2), (32, 2, 2), (48, 2, 2)]:
        for i in range(blocks):
            layers.append(bottleneck(cin, c, stride if i == 0 else 1))
            cin = 4 * c
    return nn.Sequential(layers), cin


def build_inception_v3(rng):
    def branch(*mods):
        return nn.Sequential(list(mods))

    def conv_bn_seq(cin, cout, k, stride=1):
        return nn.Sequential(_conv_bn(cin, cout, k, stride, nn.ReLU, rng))

    def inception(cin, c1, cr3, c3, cr5, c5, cp):
        return nn.Parallel([
            conv_bn_seq(cin, c1, 1),
            branch(conv_bn_seq(cin, cr3, 1), conv_bn_seq(cr3, c3, 3)),
            # 5x5 factorized as two 3x3
            branch(conv_bn_seq(cin, cr5, 1), conv_bn_seq(cr5, c5, 3),
                   conv_bn_seq(c5, c5, 3)),
            branch(nn.AvgPool2D(3, 1), conv_bn_seq(cin, cp, 1)),
        ])

    def reduction(cin, c3, cr, cd):
        return nn.Parallel([
            conv_bn_seq(cin, c3, 3, stride=2),
            branch(conv_bn_seq(cin, cr, 1), conv_bn_seq(cr, cd, 3),
                   conv_bn_seq(cd, cd, 3, stride=2)),
            nn.Sequential([nn.MaxPool2D(3, 2)]),
        ])

    layers = (
        _conv_bn(3, 8, 3, 2, nn.ReLU, rng)
        + _conv_bn(8, 16, 3, 2, nn.ReLU, rng)
        + _conv_bn(16, 24, 3, 1, nn.ReLU, rng)
        + [nn.MaxPool2D(3, 2)]
    )
    layers.append(inception(24, 8, 6, 8, 6, 8, 8))       # -> 32 @ 28
    layers.append(inception(32, 8, 6, 8, 6, 8, 8))       # -> 32
    layers.append(reduction(32, 16, 8, 12))              # -> 32+16+12=60 @ 14
    layers.append(inception(60, 16, 12, 16, 12, 16, 16))  # -> 64
    layers.append(inception(64, 16, 12, 16, 12, 16, 16))  # -> 64
    layers.append(reduction(64, 24, 12, 16))             # -> 64+24+16=104 @ 7
    layers += _conv_bn(104, 96, 1, 1, nn.ReLU, rng)
    return nn.Sequential(layers), 96


def build_efficientnet_b0(rng):
    def mbconv(cin, cout, expand, k, stride):
        mid = cin * expand
        body = []
        if expand != 1:
            body += _conv_bn(cin, mid, 1, 1, nn.Swish, rng)
        body += [nn.DepthwiseConv2D(mid, k, stride=stride, rng=rng),
                 nn.BatchNorm2D(mid), nn.Swish(),
                 nn.SqueezeExcite(mid, max(1, cin // 4), rng=rng)]
        body += _conv_bn(mid, cout, 1, 1, None, rng)
        seq = nn.Sequential(body)
        if stride == 1 and cin == cout:
            return nn.Residual(seq)
        return seq

    layers = _conv_bn(3, 8, 3, 2, nn.Swish, rng)
    spec = [(1, 8, 3, 1), (6, 12, 3, 2), (6, 16, 5, 2), (6, 16, 3, 1),
            (6, 24, 5, 2), (6, 24, 3, 1), (6, 32, 5, 2)]
    cin = 8
    for expand, cout, k, stride in spec:
        layers.append(mbconv(cin, cout, expand, k, stride))
        cin = cout
    layers += _conv_bn(cin, 64, 1, 1, nn.Swish, rng)
    return nn.Sequential(layers), 64


def build_nasnet_mobile(rng):
    def sep(c, k, stride=1):
        return nn.Sequential([
            nn.DepthwiseConv2D(c, k, stride=stride, rng=rng),
            nn.Conv2D(c, c, 1, rng=rng),
            nn.BatchNorm2D(c), nn.ReLU(),
        ])

    def normal_cell(c):
        pairs = nn.Parallel([
            nn.Residual(sep(c, 3), sep(c, 3)),
            nn.Residual(sep(c, 5)),
            nn.Residual(nn.Sequential([nn.AvgPool2D(3, 1)])),
        ])
        return nn.Sequential([pairs] + _conv_bn(3 * c, c, 1, 1, nn.ReLU, rng))

    def reduction_cell(cin, cout):
        pairs = nn.Parallel([
            sep(cin, 3, stride=2),
            sep(cin, 5, stride=2),
            nn.Sequential([nn.MaxPool2D(3, 2)]),
        ])
        return nn.Sequential([pairs] + _conv_bn(3 * cin, cout, 1, 1, nn.ReLU, rng))

    layers = _conv_bn(3, 8, 3, 2, nn.ReLU, rng)
    layers.append(reduction_cell(8, 16))    # 56
    layers.append(normal_cell(16))
    layers.append(reduction_cell(16, 24))   # 28
    layers.append(normal_cell(24))
    layers.append(reduction_cell(24, 48))   # 14
    layers.append(normal_cell(48))
    layers.append(reduction_cell(48, 64))   # 7
    layers += _conv_bn(64, 96, 1, 1, nn.ReLU, rng)
    return nn.Sequential(layers), 96


BUILDERS = {
    "mobilenet_v2": build_mobilenet_v2,
    "nasnet_mobile": build_nasnet_mobile,
    "efficientnet_b0": build_efficientnet_b0,
    "resnet50": build_resnet50,
    "inception_v3": build_inception_v3,
}
