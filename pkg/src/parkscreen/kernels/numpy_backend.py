"""Pure-numpy implementations of the hot image/conv kernels.

Reference semantics for the numba backend; selected at import time by
``parkscreen.kernels`` when numba is unavailable or disabled via the
``PARKSCREEN_NO_NUMBA`` environment variable.

Array layout is NHWC throughout. ``im2col`` column order is (ky, kx, c).
"""

import numpy as np

NAME = "numpy"


def im2col(xp, kh, kw, sh, sw):
    """Gather conv patches from a pre-padded input.

    xp: (N, Hp, Wp, C) -> cols (N*OH*OW, kh*kw*C)
    """
    n, hp, wp, c = xp.shape
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    win = win[:, ::sh, ::sw]  # (n, oh, ow, c, kh, kw)
    cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * oh * ow, kh * kw * c)
    return np.ascontiguousarray(cols)


def col2im_add(cols, n, hp, wp, c, kh, kw, sh, sw):
    """Scatter-add column gradients back onto the padded input shape."""
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    dxp = np.zeros((n, hp, wp, c), dtype=cols.dtype)
    cols6 = cols.reshape(n, oh, ow, kh, kw, c)
    for ky in range(kh):
        for kx in range(kw):
            # windows at a fixed (ky, kx) land on disjoint pixels
            dxp[:, ky:ky + sh * oh:sh, kx:kx + sw * ow:sw, :] += cols6[:, :, :, ky, kx, :]
    return dxp


def depthwise_forward(xp, w, sh, sw):
    """Per-channel conv on a pre-padded input. w: (kh, kw, C)."""
    n, hp, wp, c = xp.shape
    kh, kw = w.shape[:2]
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    y = np.zeros((n, oh, ow, c), dtype=xp.dtype)
    for ky in range(kh):
        for kx in range(kw):
            y += xp[:, ky:ky + sh * oh:sh, kx:kx + sw * ow:sw, :] * w[ky, kx]
    return y


def depthwise_backward(xp, w, dy, sh, sw):
    n, hp, wp, c = xp.shape
    kh, kw = w.shape[:2]
    oh, ow = dy.shape[1:3]
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    for ky in range(kh):
        for kx in range(kw):
            view = xp[:, ky:ky + sh * oh:sh, kx:kx + sw * ow:sw, :]
            dw[ky, kx] = (view * dy).sum(axis=(0, 1, 2))
            dxp[:, ky:ky + sh * oh:sh, kx:kx + sw * ow:sw, :] += dy * w[ky, kx]
    return dxp, dw


def _pool_windows(x, kh, kw, sh, sw, pt, pb, pl, pr, fill):
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)), constant_values=fill)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    return win[:, ::sh, ::sw]  # (n, oh, ow, c, kh, kw)


def maxpool_forward(x, kh, kw, sh, sw, pt, pb, pl, pr):
    """Max pool; returns (y, idx) with idx flat over the unpadded H*W grid."""
    n, h, w_, c = x.shape
    win = _pool_windows(x, kh, kw, sh, sw, pt, pb, pl, pr, -np.inf)
    n_, oh, ow, c_, _, _ = win.shape
    flat = win.reshape(n_, oh, ow, c_, kh * kw)
    k_idx = flat.argmax(axis=-1)
    y = np.take_along_axis(flat, k_idx[..., None], axis=-1)[..., 0]
    oy = np.arange(oh)[None, :, None, None]
    ox = np.arange(ow)[None, None, :, None]
    iy = oy * sh - pt + k_idx // kw
    ix = ox * sw - pl + k_idx % kw
    idx = (iy * w_ + ix).astype(np.int64)
    return np.ascontiguousarray(y), idx


def maxpool_backward(idx, dy, h, w):
    n, oh, ow, c = dy.shape
    dx = np.zeros((n, h * w, c), dtype=dy.dtype)
    n_idx = np.arange(n)[:, None, None, None]
    c_idx = np.arange(c)[None, None, None, :]
    np.add.at(dx, (n_idx, idx, c_idx), dy)
    return dx.reshape(n, h, w, c)


def avgpool_forward(x, kh, kw, sh, sw, pt, pb, pl, pr):
    """Average pool, padding cells excluded from the divisor."""
    win = _pool_windows(x, kh, kw, sh, sw, pt, pb, pl, pr, 0.0)
    s = win.sum(axis=(-1, -2))
    ones = np.ones(x.shape[1:3] + (1,), dtype=x.dtype)[None]
    cnt = _pool_windows(ones, kh, kw, sh, sw, pt, pb, pl, pr, 0.0).sum(axis=(-1, -2))
    return np.ascontiguousarray(s / cnt)


def avgpool_backward(dy, h, w, kh, kw, sh, sw, pt, pb, pl, pr):
    n, oh, ow, c = dy.shape
    ones = np.ones((1, h, w, 1), dtype=dy.dtype)
    cnt = _pool_windows(ones, kh, kw, sh, sw, pt, pb, pl, pr, 0.0).sum(axis=(-1, -2))
    g = dy / cnt
    dxp = np.zeros((n, h + pt + pb, w + pl + pr, c), dtype=dy.dtype)
    for ky in range(kh):
        for kx in range(kw):
            dxp[:, ky:ky + sh * oh:sh, kx:kx + sw * ow:sw, :] += g
    return dxp[:, pt:pt + h, pl:pl + w, :]


def bilinear_resize(img, oh, ow):
    """Resize (H, W, C) float array with half-pixel-center sampling."""
    h, w, c = img.shape
    sy = h / oh
    sx = w / ow
    fy = np.clip((np.arange(oh) + 0.5) * sy - 0.5, 0.0, h - 1.0)
    fx = np.clip((np.arange(ow) + 0.5) * sx - 0.5, 0.0, w - 1.0)
    y0 = np.floor(fy).astype(np.int64)
    x0 = np.floor(fx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (fy - y0).astype(img.dtype)[:, None, None]
    wx = (fx - x0).astype(img.dtype)[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def affine_warp_u8(img, inv, fill):
    """Warp a (H, W, 3) uint8 image by the inverse map [x_src; y_src] = inv @ [x, y, 1].

    Bilinear sampling; samples falling outside the source are set to ``fill``.
    """
    h, w, _ = img.shape
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    sx = inv[0, 0] * gx + inv[0, 1] * gy + inv[0, 2]
    sy = inv[1, 0] * gx + inv[1, 1] * gy + inv[1, 2]
    inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    sxc = np.clip(sx, 0.0, w - 1.0)
    syc = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sxc).astype(np.int64)
    y0 = np.floor(syc).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = (sxc - x0)[..., None]
    wy = (syc - y0)[..., None]
    f = img.astype(np.float64)
    top = f[y0, x0] * (1 - wx) + f[y0, x1] * wx
    bot = f[y1, x0] * (1 - wx) + f[y1, x1] * wx
    val = top * (1 - wy) + bot * wy
    out = np.floor(val + 0.5)
    out[~inside] = float(fill)
    return np.clip(out, 0, 255).astype(np.uint8)
