"""Minimal NHWC layer library with explicit forward/backward passes.

Enough to express the five backbone families (plain, depthwise-separable,
inception-branch, residual-bottleneck and squeeze-excite blocks) plus the
classification head. Gradients are exercised against finite differences
in the test suite.
"""

import numpy as np

from ..kernels import ops


class Param:
    __slots__ = ("val", "grad")

    def __init__(self, val):
        self.val = val
        self.grad = np.zeros_like(val)


class Module:
    """Base class: subclasses fill _params/_buffers and implement forward/backward."""

    def __init__(self):
        self._params = {}
        self._buffers = {}

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def children(self):
        return ()

    def named_modules(self, prefix=""):
        yield prefix, self
        for name, child in self.children():
            yield from child.named_modules(f"{prefix}{name}.")

    def named_params(self, prefix=""):
        for name, p in self._params.items():
            yield prefix + name, p
        for cname, child in self.children():
            yield from child.named_params(f"{prefix}{cname}.")

    def named_arrays(self, prefix=""):
        """Params plus buffers (running stats), in deterministic order."""
        for name, p in self._params.items():
            yield prefix + name, p.val
        for name, b in self._buffers.items():
            yield prefix + name, b
        for cname, child in self.children():
            yield from child.named_arrays(f"{prefix}{cname}.")

    def params(self):
        return [p for _, p in self.named_params()]

    def state(self):
        return {name: arr.copy() for name, arr in self.named_arrays()}

    def load_state(self, state):
        own = dict(self.named_arrays())
        if set(own) != set(state):
            missing = sorted(set(own) - set(state))
            extra = sorted(set(state) - set(own))
            raise ValueError(f"state mismatch: missing={missing[:4]} extra={extra[:4]}")
        for name, arr in own.items():
            src = state[name]
            if arr.shape != src.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {src.shape}")
            arr[...] = src

    def __call__(self, x, training=False):
        return self.forward(x, training=training)


def same_pads(size, k, s):
    """TF-style SAME padding for one spatial dim: (before, after)."""
    out = -(-size // s)
    total = max((out - 1) * s + k - size, 0)
    return total // 2, total - total // 2


def _resolve_pads(pad, h, w, kh, kw, sh, sw):
    if pad == "same":
        pt, pb = same_pads(h, kh, sh)
        pl, pr = same_pads(w, kw, sw)
        return pt, pb, pl, pr
    if pad == "valid":
        return 0, 0, 0, 0
    raise ValueError(f"unknown padding {pad!r}")


class Conv2D(Module):
    def __init__(self, cin, cout, k, stride=1, pad="same", bias=False, rng=None, dtype=np.float32):
        super().__init__()
        rng = rng or np.random.default_rng()
        std = np.sqrt(2.0 / (k * k * cin))
        self.k, self.stride, self.pad = k, stride, pad
        self.cin, self.cout = cin, cout
        self._params["W"] = Param((rng.standard_normal((k, k, cin, cout)) * std).astype(dtype))
        self.bias = bias
        if bias:
            self._params["b"] = Param(np.zeros(cout, dtype=dtype))
        self._ctx = None

    def forward(self, x, training=False):
        n, h, w, _ = x.shape
        k, s = self.k, self.stride
        pt, pb, pl, pr = _resolve_pads(self.pad, h, w, k, k, s, s)
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if pt or pb or pl or pr else x
        cols = ops.im2col(xp, k, k, s, s)
        W2 = self._params["W"].val.reshape(k * k * self.cin, self.cout)
        y = cols @ W2
        if self.bias:
            y += self._params["b"].val
        oh = (xp.shape[1] - k) // s + 1
        ow = (xp.shape[2] - k) // s + 1
        if training:
            self._ctx = (cols, xp.shape, (pt, pb, pl, pr), (h, w))
        return y.reshape(n, oh, ow, self.cout)

    def backward(self, dy):
        cols, xpshape, pads, hw = self._ctx
        n, hp, wp, _ = xpshape
        pt, pb, pl, pr = pads
        h, w = hw
        k, s = self.k, self.stride
        dyf = dy.reshape(-1, self.cout)
        W = self._params["W"]
        W.grad += (cols.T @ dyf).reshape(W.val.shape)
        if self.bias:
            self._params["b"].grad += dyf.sum(axis=0)
        dcols = dyf @ W.val.reshape(k * k * self.cin, self.cout).T
        dxp = ops.col2im_add(dcols, n, hp, wp, self.cin, k, k, s, s)
        if pt or pb or pl or pr:
            return dxp[:, pt:pt + h, pl:pl + w, :]
        return dxp


class DepthwiseConv2D(Module):
    def __init__(self, c, k, stride=1, pad="same", rng=None, dtype=np.float32):
        super().__init__()
        rng = rng or np.random.default_rng()
        std = np.sqrt(2.0 / (k * k))
        self.c, self.k, self.stride, self.pad = c, k, stride, pad
        self._params["W"] = Param((rng.standard_normal((k, k, c)) * std).astype(dtype))
        self._ctx = None

    def forward(self, x, training=False):
        n, h, w, _ = x.shape
        k, s = self.k, self.stride
        pt, pb, pl, pr = _resolve_pads(self.pad, h, w, k, k, s, s)
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if pt or pb or pl or pr else x
        y = ops.depthwise_forward(xp, self._params["W"].val, s, s)
        if training:
            self._ctx = (xp, (pt, pb, pl, pr), (h, w))
        return y

    def backward(self, dy):
        xp, pads, hw = self._ctx
        pt, pb, pl, pr = pads
        h, w = hw
        W = self._params["W"]
        dxp, dw = ops.depthwise_backward(xp, W.val, dy, self.stride, self.stride)
        W.grad += dw
        if pt or pb or pl or pr:
            return dxp[:, pt:pt + h, pl:pl + w, :]
        return dxp


class BatchNorm2D(Module):
    def __init__(self, c, momentum=0.9, eps=1e-3, dtype=np.float32):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self._params["gamma"] = Param(np.ones(c, dtype=dtype))
        self._params["beta"] = Param(np.zeros(c, dtype=dtype))
        self._buffers["running_mean"] = np.zeros(c, dtype=dtype)
        self._buffers["running_var"] = np.ones(c, dtype=dtype)
        self._ctx = None

    def forward(self, x, training=False):
        g = self._params["gamma"].val
        b = self._params["beta"].val
        if training:
            mu = x.mean(axis=(0, 1, 2))
            var = x.var(axis=(0, 1, 2))
            inv = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mu) * inv
            m = self.momentum
            rm, rv = self._buffers["running_mean"], self._buffers["running_var"]
            rm[...] = m * rm + (1 - m) * mu
            rv[...] = m * rv + (1 - m) * var
            self._ctx = (xhat, inv)
            return (g * xhat + b).astype(x.dtype, copy=False)
        inv = 1.0 / np.sqrt(self._buffers["running_var"] + self.eps)
        return (x - self._buffers["running_mean"]) * (g * inv) + b

    def backward(self, dy):
        xhat, inv = self._ctx
        m = float(np.prod(dy.shape[:3]))
        self._params["gamma"].grad += (dy * xhat).sum(axis=(0, 1, 2))
        self._params["beta"].grad += dy.sum(axis=(0, 1, 2))
        dxhat = dy * self._params["gamma"].val
        t1 = dxhat.sum(axis=(0, 1, 2))
        t2 = (dxhat * xhat).sum(axis=(0, 1, 2))
        return (inv / m) * (m * dxhat - t1 - xhat * t2)


class ReLU(Module):
    def forward(self, x, training=False):
        if training:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, dy):
        return dy * self._mask


class ReLU6(Module):
    def forward(self, x, training=False):
        if training:
            self._mask = (x > 0) & (x < 6)
        return np.clip(x, 0, 6)

    def backward(self, dy):
        return dy * self._mask


class Swish(Module):
    def forward(self, x, training=False):
        sig = 1.0 / (1.0 + np.exp(-x))
        if training:
            self._ctx = (x, sig)
        return x * sig

    def backward(self, dy):
        x, sig = self._ctx
        return dy * (sig * (1 + x * (1 - sig)))


class MaxPool2D(Module):
    def __init__(self, k, stride, pad="same"):
        super().__init__()
        self.k, self.stride, self.pad = k, stride, pad

    def forward(self, x, training=False):
        n, h, w, _ = x.shape
        k, s = self.k, self.stride
        pads = _resolve_pads(self.pad, h, w, k, k, s, s)
        y, idx = ops.maxpool_forward(x, k, k, s, s, *pads)
        if training:
            self._ctx = (idx, h, w)
        return y

    def backward(self, dy):
        idx, h, w = self._ctx
        return ops.maxpool_backward(idx, dy, h, w)


class AvgPool2D(Module):
    def __init__(self, k, stride, pad="same"):
        super().__init__()
        self.k, self.stride, self.pad = k, stride, pad

    def forward(self, x, training=False):
        n, h, w, _ = x.shape
        k, s = self.k, self.stride
        pads = _resolve_pads(self.pad, h, w, k, k, s, s)
        if training:
            self._ctx = (h, w, pads)
        return ops.avgpool_forward(x, k, k, s, s, *pads)

    def backward(self, dy):
        h, w, pads = self._ctx
        k, s = self.k, self.stride
        return ops.avgpool_backward(dy, h, w, k, k, s, s, *pads)


class GlobalAvgPool(Module):
    def forward(self, x, training=False):
        if training:
            self._shape = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, dy):
        n, h, w, c = self._shape
        return np.broadcast_to(dy[:, None, None, :] / (h * w), self._shape).astype(dy.dtype, copy=False)


class Dense(Module):
    def __init__(self, cin, cout, rng=None, dtype=np.float32):
        super().__init__()
        rng = rng or np.random.default_rng()
        limit = np.sqrt(6.0 / (cin + cout))
        self._params["W"] = Param(rng.uniform(-limit, limit, (cin, cout)).astype(dtype))
        self._params["b"] = Param(np.zeros(cout, dtype=dtype))
        self._ctx = None

    def forward(self, x, training=False):
        if training:
            self._ctx = x
        return x @ self._params["W"].val + self._params["b"].val

    def backward(self, dy):
        x = self._ctx
        self._params["W"].grad += x.T @ dy
        self._params["b"].grad += dy.sum(axis=0)
        return dy @ self._params["W"].val.T


class Dropout(Module):
    """Inverted dropout; ``rng`` must be assigned before training passes."""

    def __init__(self, p):
        super().__init__()
        self.p = p
        self.rng = None
        self._mask = None

    def forward(self, x, training=False):
        if not training or self.p <= 0.0:
            return x
        if self.rng is None:
            raise RuntimeError("Dropout.rng not set for a training pass")
        keep = 1.0 - self.p
        self._mask = (self.rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


class SqueezeExcite(Module):
    """Channel gate: GAP -> dense/relu -> dense/sigmoid -> scale input."""

    def __init__(self, c, reduced, rng=None, dtype=np.float32):
        super().__init__()
        rng = rng or np.random.default_rng()
        l1 = np.sqrt(6.0 / (c + reduced))
        l2 = np.sqrt(6.0 / (reduced + c))
        self._params["W1"] = Param(rng.uniform(-l1, l1, (c, reduced)).astype(dtype))
        self._params["b1"] = Param(np.zeros(reduced, dtype=dtype))
        self._params["W2"] = Param(rng.uniform(-l2, l2, (reduced, c)).astype(dtype))
        self._params["b2"] = Param(np.zeros(c, dtype=dtype))
        self._ctx = None

    def forward(self, x, training=False):
        z = x.mean(axis=(1, 2))
        pre = z @ self._params["W1"].val + self._params["b1"].val
        h = np.maximum(pre, 0)
        a = 1.0 / (1.0 + np.exp(-(h @ self._params["W2"].val + self._params["b2"].val)))
        if training:
            self._ctx = (x, z, pre, h, a)
        return x * a[:, None, None, :]

    def backward(self, dy):
        x, z, pre, h, a = self._ctx
        n, hh, ww, c = x.shape
        dx_gate = dy * a[:, None, None, :]
        da = (dy * x).sum(axis=(1, 2))
        dpre2 = da * a * (1 - a)
        self._params["W2"].grad += h.T @ dpre2
        self._params["b2"].grad += dpre2.sum(axis=0)
        dh = dpre2 @ self._params["W2"].val.T
        dpre1 = dh * (pre > 0)
        self._params["W1"].grad += z.T @ dpre1
        self._params["b1"].grad += dpre1.sum(axis=0)
        dz = dpre1 @ self._params["W1"].val.T
        return dx_gate + dz[:, None, None, :] / (hh * ww)


class Sequential(Module):
    def __init__(self, modules):
        super().__init__()
        self.modules = list(modules)

    def children(self):
        return [(str(i), m) for i, m in enumerate(self.modules)]

    def forward(self, x, training=False):
        for m in self.modules:
            x = m.forward(x, training=training)
        return x

    def backward(self, dy):
        for m in reversed(self.modules):
            dy = m.backward(dy)
        return dy


class Parallel(Module):
    """Apply branches to the same input; concat outputs on the channel axis."""

    def __init__(self, branches):
        super().__init__()
        self.branches = list(branches)
        self._splits = None

    def children(self):
        return [(f"b{i}", m) for i, m in enumerate(self.branches)]

    def forward(self, x, training=False):
        outs = [b.forward(x, training=training) for b in self.branches]
        self._splits = [o.shape[3] for o in outs]
        return np.concatenate(outs, axis=3)

    def backward(self, dy):
        dx = None
        start = 0
        for b, width in zip(self.branches, self._splits):
            part = b.backward(dy[..., start:start + width])
            dx = part if dx is None else dx + part
            start += width
        return dx


class Residual(Module):
    """y = body(x) + shortcut(x); identity shortcut when none given."""

    def __init__(self, body, shortcut=None):
        super().__init__()
        self.body = body
        self.shortcut = shortcut

    def children(self):
        out = [("body", self.body)]
        if self.shortcut is not None:
            out.append(("shortcut", self.shortcut))
        return out

    def forward(self, x, training=False):
        y = self.body.forward(x, training=training)
        s = self.shortcut.forward(x, training=training) if self.shortcut is not None else x
        return y + s

    def backward(self, dy):
        dx = self.body.backward(dy)
        if self.shortcut is not None:
            return dx + self.shortcut.backward(dy)
        return dx + dy


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean softmax cross-entropy. Returns (loss, dlogits, probs)."""
    p = softmax(logits)
    n = logits.shape[0]
    eps = np.finfo(p.dtype).tiny
    loss = float(-np.log(p[np.arange(n), labels] + eps).mean())
    d = p.copy()
    d[np.arange(n), labels] -= 1.0
    return loss, d / n, p
