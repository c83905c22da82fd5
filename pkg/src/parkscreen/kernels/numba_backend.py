"""Numba-jitted versions of the hot kernels.

Loop order matches the numpy backend per output element, so both paths
agree to float rounding. All kernels are lazily specialized (f4 and f8)
and cached on disk.
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _im2col(xp, kh, kw, sh, sw, cols):
    n, hp, wp, c = xp.shape
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                row = (i * oh + oy) * ow + ox
                col = 0
                for ky in range(kh):
                    for kx in range(kw):
                        for ch in range(c):
                            cols[row, col] = xp[i, oy * sh + ky, ox * sw + kx, ch]
                            col += 1


def im2col(xp, kh, kw, sh, sw):
    n, hp, wp, c = xp.shape
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    cols = np.empty((n * oh * ow, kh * kw * c), dtype=xp.dtype)
    _im2col(np.ascontiguousarray(xp), kh, kw, sh, sw, cols)
    return cols


@njit(cache=True)
def _col2im_add(cols, dxp, kh, kw, sh, sw):
    n, hp, wp, c = dxp.shape
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                row = (i * oh + oy) * ow + ox
                col = 0
                for ky in range(kh):
                    for kx in range(kw):
                        for ch in range(c):
                            dxp[i, oy * sh + ky, ox * sw + kx, ch] += cols[row, col]
                            col += 1


def col2im_add(cols, n, hp, wp, c, kh, kw, sh, sw):
    dxp = np.zeros((n, hp, wp, c), dtype=cols.dtype)
    _col2im_add(np.ascontiguousarray(cols), dxp, kh, kw, sh, sw)
    return dxp


@njit(cache=True)
def _depthwise_forward(xp, w, sh, sw, y):
    n, hp, wp, c = xp.shape
    kh, kw = w.shape[0], w.shape[1]
    oh, ow = y.shape[1], y.shape[2]
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    s = 0.0
                    for ky in range(kh):
                        for kx in range(kw):
                            s += xp[i, oy * sh + ky, ox * sw + kx, ch] * w[ky, kx, ch]
                    y[i, oy, ox, ch] = s


def depthwise_forward(xp, w, sh, sw):
    n, hp, wp, c = xp.shape
    kh, kw = w.shape[:2]
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    y = np.empty((n, oh, ow, c), dtype=xp.dtype)
    _depthwise_forward(np.ascontiguousarray(xp), np.ascontiguousarray(w), sh, sw, y)
    return y


@njit(cache=True)
def _depthwise_backward(xp, w, dy, sh, sw, dxp, dw):
    n, hp, wp, c = xp.shape
    kh, kw = w.shape[0], w.shape[1]
    oh, ow = dy.shape[1], dy.shape[2]
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    g = dy[i, oy, ox, ch]
                    for ky in range(kh):
                        for kx in range(kw):
                            dxp[i, oy * sh + ky, ox * sw + kx, ch] += g * w[ky, kx, ch]
                            dw[ky, kx, ch] += g * xp[i, oy * sh + ky, ox * sw + kx, ch]


def depthwise_backward(xp, w, dy, sh, sw):
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    _depthwise_backward(
        np.ascontiguousarray(xp), np.ascontiguousarray(w),
        np.ascontiguousarray(dy), sh, sw, dxp, dw,
    )
    return dxp, dw


@njit(cache=True)
def _maxpool_forward(x, kh, kw, sh, sw, pt, pl, y, idx):
    n, h, w, c = x.shape
    oh, ow = y.shape[1], y.shape[2]
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    best = -np.inf
                    bidx = 0
                    for ky in range(kh):
                        iy = oy * sh - pt + ky
                        if iy < 0 or iy >= h:
                            continue
                        for kx in range(kw):
                            ix = ox * sw - pl + kx
                            if ix < 0 or ix >= w:
                                continue
                            v = x[i, iy, ix, ch]
                            if v > best:
                                best = v
                                bidx = iy * w + ix
                    y[i, oy, ox, ch] = best
                    idx[i, oy, ox, ch] = bidx


def maxpool_forward(x, kh, kw, sh, sw, pt, pb, pl, pr):
    n, h, w, c = x.shape
    oh = (h + pt + pb - kh) // sh + 1
    ow = (w + pl + pr - kw) // sw + 1
    y = np.empty((n, oh, ow, c), dtype=x.dtype)
    idx = np.empty((n, oh, ow, c), dtype=np.int64)
    _maxpool_forward(np.ascontiguousarray(x), kh, kw, sh, sw, pt, pl, y, idx)
    return y, idx


@njit(cache=True)
def _maxpool_backward(idx, dy, dx):
    n, oh, ow, c = dy.shape
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    dx[i, idx[i, oy, ox, ch], ch] += dy[i, oy, ox, ch]


def maxpool_backward(idx, dy, h, w):
    n, oh, ow, c = dy.shape
    dx = np.zeros((n, h * w, c), dtype=dy.dtype)
    _maxpool_backward(idx, np.ascontiguousarray(dy), dx)
    return dx.reshape(n, h, w, c)


@njit(cache=True)
def _avgpool_forward(x, kh, kw, sh, sw, pt, pl, y):
    n, h, w, c = x.shape
    oh, ow = y.shape[1], y.shape[2]
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                cnt = 0
                for ky in range(kh):
                    iy = oy * sh - pt + ky
                    if iy < 0 or iy >= h:
                        continue
                    for kx in range(kw):
                        ix = ox * sw - pl + kx
                        if 0 <= ix < w:
                            cnt += 1
                for ch in range(c):
                    s = 0.0
                    for ky in range(kh):
                        iy = oy * sh - pt + ky
                        if iy < 0 or iy >= h:
                            continue
                        for kx in range(kw):
                            ix = ox * sw - pl + kx
                            if ix < 0 or ix >= w:
                                continue
                            s += x[i, iy, ix, ch]
                    y[i, oy, ox, ch] = s / cnt


def avgpool_forward(x, kh, kw, sh, sw, pt, pb, pl, pr):
    n, h, w, c = x.shape
    oh = (h + pt + pb - kh) // sh + 1
    ow = (w + pl + pr - kw) // sw + 1
    y = np.empty((n, oh, ow, c), dtype=x.dtype)
    _avgpool_forward(np.ascontiguousarray(x), kh, kw, sh, sw, pt, pl, y)
    return y


@njit(cache=True)
def _avgpool_backward(dy, dx, kh, kw, sh, sw, pt, pl):
    n, oh, ow, c = dy.shape
    h, w = dx.shape[1], dx.shape[2]
    for i in range(n):
        for oy in range(oh):
            for ox in range(ow):
                cnt = 0
                for ky in range(kh):
                    iy = oy * sh - pt + ky
                    if iy < 0 or iy >= h:
                        continue
                    for kx in range(kw):
                        ix = ox * sw - pl + kx
                        if 0 <= ix < w:
                            cnt += 1
                for ch in range(c):
                    g = dy[i, oy, ox, ch] / cnt
                    for ky in range(kh):
                        iy = oy * sh - pt + ky
                        if iy < 0 or iy >= h:
                            continue
                        for kx in range(kw):
                            ix = ox * sw - pl + kx
                            if ix < 0 or ix >= w:
                                continue
                            dx[i, iy, ix, ch] += g


def avgpool_backward(dy, h, w, kh, kw, sh, sw, pt, pb, pl, pr):
    n, oh, ow, c = dy.shape
    dx = np.zeros((n, h, w, c), dtype=dy.dtype)
    _avgpool_backward(np.ascontiguousarray(dy), dx, kh, kw, sh, sw, pt, pl)
    return dx


@njit(cache=True)
def _bilinear_resize(img, out):
    h, w, c = img.shape
    oh, ow, _ = out.shape
    sy = h / oh
    sx = w / ow
    for oy in range(oh):
        fy = (oy + 0.5) * sy - 0.5
        if fy < 0.0:
            fy = 0.0
        if fy > h - 1.0:
            fy = h - 1.0
        y0 = int(np.floor(fy))
        y1 = min(y0 + 1, h - 1)
        wy = fy - y0
        for ox in range(ow):
            fx = (ox + 0.5) * sx - 0.5
            if fx < 0.0:
                fx = 0.0
            if fx > w - 1.0:
                fx = w - 1.0
            x0 = int(np.floor(fx))
            x1 = min(x0 + 1, w - 1)
            wx = fx - x0
            for ch in range(c):
                top = img[y0, x0, ch] * (1 - wx) + img[y0, x1, ch] * wx
                bot = img[y1, x0, ch] * (1 - wx) + img[y1, x1, ch] * wx
                out[oy, ox, ch] = top * (1 - wy) + bot * wy


def bilinear_resize(img, oh, ow):
    out = np.empty((oh, ow, img.shape[2]), dtype=img.dtype)
    _bilinear_resize(np.ascontiguousarray(img), out)
    return out


@njit(cache=True)
def _affine_warp_u8(img, inv, fill, out):
    h, w, c = img.shape
    for gy in range(h):
        for gx in range(w):
            sx = inv[0, 0] * gx + inv[0, 1] * gy + inv[0, 2]
            sy = inv[1, 0] * gx + inv[1, 1] * gy + inv[1, 2]
            if sx < 0.0 or sx > w - 1.0 or sy < 0.0 or sy > h - 1.0:
                for ch in range(c):
                    out[gy, gx, ch] = fill
                continue
            x0 = int(np.floor(sx))
            y0 = int(np.floor(sy))
            x1 = min(x0 + 1, w - 1)
            y1 = min(y0 + 1, h - 1)
            wx = sx - x0
            wy = sy - y0
            for ch in range(c):
                top = img[y0, x0, ch] * (1 - wx) + img[y0, x1, ch] * wx
                bot = img[y1, x0, ch] * (1 - wx) + img[y1, x1, ch] * wx
                v = np.floor(top * (1 - wy) + bot * wy + 0.5)
                if v < 0.0:
                    v = 0.0
                if v > 255.0:
                    v = 255.0
                out[gy, gx, ch] = v


def affine_warp_u8(img, inv, fill):
    out = np.empty_like(img)
    _affine_warp_u8(
        np.ascontiguousarray(img).astype(np.float64),
        np.ascontiguousarray(inv.astype(np.float64)),
        float(fill),
        out,
    )
    return out
