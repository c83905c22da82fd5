"""Numba and numpy kernel backends must agree; geometry kernels obey their contracts."""

import numpy as np
import pytest

from parkscreen.kernels import numpy_backend

try:
    from parkscreen.kernels import numba_backend
    BACKENDS = [numpy_backend, numba_backend]
except ImportError:
    BACKENDS = [numpy_backend]

RNG = np.random.default_rng(1234)


def _pair_ids():
    return [b.NAME for b in BACKENDS]


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
@pytest.mark.parametrize("stride", [1, 2])
def test_im2col_col2im_roundtrip_vs_reference(backend, stride):
    x = RNG.standard_normal((2, 9, 11, 3)).astype(np.float32)
    cols = backend.im2col(x, 3, 3, stride, stride)
    ref = numpy_backend.im2col(x, 3, 3, stride, stride)
    np.testing.assert_allclose(cols, ref, rtol=0, atol=0)

    dcols = RNG.standard_normal(cols.shape).astype(np.float32)
    got = backend.col2im_add(dcols, 2, 9, 11, 3, 3, 3, stride, stride)
    want = numpy_backend.col2im_add(dcols, 2, 9, 11, 3, 3, 3, stride, stride)
    np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
@pytest.mark.parametrize("stride", [1, 2])
def test_depthwise_matches_reference(backend, stride):
    x = RNG.standard_normal((2, 10, 10, 4)).astype(np.float32)
    w = RNG.standard_normal((3, 3, 4)).astype(np.float32)
    y = backend.depthwise_forward(x, w, stride, stride)
    ref = numpy_backend.depthwise_forward(x, w, stride, stride)
    np.testing.assert_allclose(y, ref, rtol=1e-5, atol=1e-6)

    dy = RNG.standard_normal(y.shape).astype(np.float32)
    dx, dw = backend.depthwise_backward(x, w, dy, stride, stride)
    rdx, rdw = numpy_backend.depthwise_backward(x, w, dy, stride, stride)
    np.testing.assert_allclose(dx, rdx, rtol=1e-5, atol=1e-6)
    np.testing.assert_allclose(dw, rdw, rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_maxpool_matches_reference_and_scatter(backend):
    x = RNG.standard_normal((2, 9, 9, 3)).astype(np.float32)
    y, idx = backend.maxpool_forward(x, 3, 3, 2, 2, 0, 1, 0, 1)
    ry, ridx = numpy_backend.maxpool_forward(x, 3, 3, 2, 2, 0, 1, 0, 1)
    np.testing.assert_array_equal(y, ry)
    np.testing.assert_array_equal(idx, ridx)

    dy = RNG.standard_normal(y.shape).astype(np.float32)
    dx = backend.maxpool_backward(idx, dy, 9, 9)
    rdx = numpy_backend.maxpool_backward(ridx, dy, 9, 9)
    np.testing.assert_allclose(dx, rdx, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_avgpool_excludes_padding(backend):
    x = np.ones((1, 4, 4, 1), dtype=np.float32)
    # 3x3 stride 1, same padding: corners average over 4 valid cells, not 9
    y = backend.avgpool_forward(x, 3, 3, 1, 1, 1, 1, 1, 1)
    assert y.shape == (1, 4, 4, 1)
    np.testing.assert_allclose(y, 1.0, atol=1e-6)

    dy = RNG.standard_normal(y.shape).astype(np.float32)
    dx = backend.avgpool_backward(dy, 4, 4, 3, 3, 1, 1, 1, 1, 1, 1)
    rdx = numpy_backend.avgpool_backward(dy, 4, 4, 3, 3, 1, 1, 1, 1, 1, 1)
    np.testing.assert_allclose(dx, rdx, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_bilinear_resize_identity_and_constant(backend):
    img = RNG.random((17, 23, 3)).astype(np.float32)
    np.testing.assert_allclose(backend.bilinear_resize(img, 17, 23), img, atol=1e-6)

    const = np.full((10, 30, 3), 0.7, dtype=np.float32)
    out = backend.bilinear_resize(const, 24, 24)
    np.testing.assert_allclose(out, 0.7, atol=1e-6)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_bilinear_resize_matches_reference(backend):
    img = RNG.random((31, 19, 3)).astype(np.float32)
    got = backend.bilinear_resize(img, 24, 24)
    want = numpy_backend.bilinear_resize(img, 24, 24)
    np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_affine_warp_identity_and_fill(backend):
    img = RNG.integers(0, 256, (20, 20, 3), dtype=np.uint8)
    ident = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    np.testing.assert_array_equal(backend.affine_warp_u8(img, ident, 255), img)

    # translate far out of bounds: everything becomes fill
    off = np.array([[1.0, 0.0, 1000.0], [0.0, 1.0, 0.0]])
    out = backend.affine_warp_u8(img, off, 255)
    assert (out == 255).all()


@pytest.mark.parametrize("backend", BACKENDS, ids=_pair_ids())
def test_affine_warp_matches_reference(backend):
    img = RNG.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    ang = np.deg2rad(17.0)
    c, s = np.cos(ang), np.sin(ang)
    cx = cy = 15.5
    inv = np.array([
        [c, -s, cx - c * cx + s * cy],
        [s, c, cy - s * cx - c * cy],
    ])
    got = backend.affine_warp_u8(img, inv, 255)
    want = numpy_backend.affine_warp_u8(img, inv, 255)
    np.testing.assert_array_equal(got, want)
