"""Reverse-mode automatic differentiation over dense float64 tensors.

Covers exactly the operation set the conversion networks need. A graph is
built eagerly during the forward pass; ``backward(loss)`` walks it once in
reverse topological order and accumulates gradients on every node it can
reach. Build a fresh graph per training step.

No batch axis exists anywhere: feature maps are (C, T) or (C, H, W) and
batches are plain Python lists.
"""

from __future__ import annotations

import numpy as np

from . import kernels


class Tensor:
    """A float64 array plus the recorded operation that produced it."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __repr__(self):
        return "Tensor(shape=%s)" % (self.shape,)


class Parameter(Tensor):
    """Named trainable leaf tensor."""

    __slots__ = ("name",)

    def __init__(self, data, name: str):
        super().__init__(np.array(data, dtype=np.float64))
        self.name = name

    def __repr__(self):
        return "Parameter(%r, shape=%s)" % (self.name, self.shape)


def _accum(t: Tensor, g):
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(node) into .grad for every node reachable from loss.

    Parameters that did not take part in the forward pass simply keep
    grad=None, which optimizers treat as zero.
    """
    if loss.data.size != 1:
        raise ValueError("backward needs a scalar loss, got shape %s" % (loss.shape,))
    topo = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    for node in topo:
        node.grad = None
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grads(params) -> None:
    for p in params:
        p.grad = None


def _same_shape(a, b, op):
    if a.data.shape != b.data.shape:
        raise ValueError(
            "%s: shape mismatch %s vs %s" % (op, a.data.shape, b.data.shape)
        )


# ---------------------------------------------------------------------------
# elementwise / reduction ops


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    out = Tensor(a.data + b.data, (a, b))

    def bw(g):
        _accum(a, g)
        _accum(b, g)

    out._backward = bw
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "sub")
    out = Tensor(a.data - b.data, (a, b))

    def bw(g):
        _accum(a, g)
        _accum(b, -g)

    out._backward = bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "mul")
    out = Tensor(a.data * b.data, (a, b))

    def bw(g):
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    out._backward = bw
    return out


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor(a.data * c, (a,))
    out._backward = lambda g: _accum(a, g * c)
    return out


def add_const(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data + float(c), (a,))
    out._backward = lambda g: _accum(a, g)
    return out


def const_minus(c: float, a: Tensor) -> Tensor:
    out = Tensor(float(c) - a.data, (a,))
    out._backward = lambda g: _accum(a, -g)
    return out


def log(a: Tensor) -> Tensor:
    if (a.data <= 0).any():
        raise ValueError("log requires strictly positive inputs")
    out = Tensor(np.log(a.data), (a,))
    out._backward = lambda g: _accum(a, g / a.data)
    return out


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(s, (a,))
    out._backward = lambda g: _accum(a, g * s * (1.0 - s))
    return out


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    mask = a.data > 0
    out = Tensor(np.where(mask, a.data, slope * a.data), (a,))
    out._backward = lambda g: _accum(a, g * np.where(mask, 1.0, slope))
    return out


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    inside = (a.data > lo) & (a.data < hi)
    out = Tensor(np.clip(a.data, lo, hi), (a,))
    out._backward = lambda g: _accum(a, g * inside)
    return out


def mean(a: Tensor) -> Tensor:
    out = Tensor(np.array(a.data.mean()), (a,))
    out._backward = lambda g: _accum(a, np.full_like(a.data, float(g) / a.data.size))
    return out


def ssum(a: Tensor) -> Tensor:
    out = Tensor(np.array(a.data.sum()), (a,))
    out._backward = lambda g: _accum(a, np.full_like(a.data, float(g)))
    return out


def l1_mean(a: Tensor) -> Tensor:
    """Mean absolute value over all elements."""
    out = Tensor(np.array(np.abs(a.data).mean()), (a,))
    out._backward = lambda g: _accum(a, np.sign(a.data) * (float(g) / a.data.size))
    return out


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            _accum(t, piece)

    out._backward = bw
    return out


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape), (a,))
    out._backward = lambda g: _accum(a, g.reshape(a.data.shape))
    return out


def flatten(a: Tensor) -> Tensor:
    return reshape(a, (-1,))


# ---------------------------------------------------------------------------
# structured ops


def gated_linear_unit(a: Tensor, axis: int = 0) -> Tensor:
    """Split in two along `axis`: first half linear, second half the gate."""
    n = a.data.shape[axis]
    if n % 2 != 0:
        raise ValueError("GLU needs an even extent along axis %d, got %d" % (axis, n))
    half = n // 2
    lin = np.take(a.data, range(half), axis=axis)
    gate = np.take(a.data, range(half, n), axis=axis)
    s = 1.0 / (1.0 + np.exp(-gate))
    out = Tensor(lin * s, (a,))

    def bw(g):
        dlin = g * s
        dgate = g * lin * s * (1.0 - s)
        _accum(a, np.concatenate([dlin, dgate], axis=axis))

    out._backward = bw
    return out


def instance_norm(a: Tensor, eps: float = 1e-9) -> Tensor:
    """Normalize each channel (axis 0) over all remaining axes."""
    if a.data.ndim < 2:
        raise ValueError("instance_norm expects (C, ...) with spatial axes")
    axes = tuple(range(1, a.data.ndim))
    mu = a.data.mean(axis=axes, keepdims=True)
    var = a.data.var(axis=axes, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = (a.data - mu) * inv
    out = Tensor(y, (a,))

    def bw(g):
        gm = g.mean(axis=axes, keepdims=True)
        gym = (g * y).mean(axis=axes, keepdims=True)
        _accum(a, inv * (g - gm - y * gym))

    out._backward = bw
    return out


def upsample1d(a: Tensor, factor: int) -> Tensor:
    """Nearest-neighbour upsampling along the time axis of a (C, T) map."""
    if a.data.ndim != 2:
        raise ValueError("upsample1d expects a (C, T) tensor")
    out = Tensor(np.repeat(a.data, factor, axis=1), (a,))

    def bw(g):
        c, t = a.data.shape
        _accum(a, g.reshape(c, t, factor).sum(axis=2))

    out._backward = bw
    return out


def conv1d(x: Tensor, w: Tensor, b: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """1-D convolution: x (Cin, T), w (Cout, Cin, K), b (Cout,)."""
    cin, t = x.data.shape
    cout, cin_w, k = w.data.shape
    if cin != cin_w:
        raise ValueError("conv1d: input has %d channels, kernel expects %d" % (cin, cin_w))
    if t + 2 * pad < k:
        raise ValueError("conv1d: input shorter than kernel")
    xp = np.pad(x.data, ((0, 0), (pad, pad))) if pad else np.ascontiguousarray(x.data)
    y = kernels.conv1d_fwd(xp, np.ascontiguousarray(w.data), stride)
    out = Tensor(y + b.data[:, None], (x, w, b))

    def bw(g):
        g = np.ascontiguousarray(g)
        gxp = kernels.conv1d_bwd_x(g, np.ascontiguousarray(w.data), stride, xp.shape[1])
        _accum(x, gxp[:, pad : pad + t] if pad else gxp)
        _accum(w, kernels.conv1d_bwd_w(xp, g, stride, k))
        _accum(b, g.sum(axis=1))

    out._backward = bw
    return out


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """2-D convolution: x (Cin, H, W), w (Cout, Cin, KH, KW), b (Cout,)."""
    cin, h, wd = x.data.shape
    cout, cin_w, kh, kw = w.data.shape
    if cin != cin_w:
        raise ValueError("conv2d: input has %d channels, kernel expects %d" % (cin, cin_w))
    if h + 2 * pad < kh or wd + 2 * pad < kw:
        raise ValueError("conv2d: input smaller than kernel")
    if pad:
        xp = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad)))
    else:
        xp = np.ascontiguousarray(x.data)
    y = kernels.conv2d_fwd(xp, np.ascontiguousarray(w.data), stride)
    out = Tensor(y + b.data[:, None, None], (x, w, b))

    def bw(g):
        g = np.ascontiguousarray(g)
        gxp = kernels.conv2d_bwd_x(
            g, np.ascontiguousarray(w.data), stride, xp.shape[1], xp.shape[2]
        )
        _accum(x, gxp[:, pad : pad + h, pad : pad + wd] if pad else gxp)
        _accum(w, kernels.conv2d_bwd_w(xp, g, stride, kh, kw))
        _accum(b, g.sum(axis=(1, 2)))

    out._backward = bw
    return out


def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map of a flat vector: w (M, N) @ x (N,) + b (M,)."""
    if x.data.ndim != 1 or w.data.ndim != 2 or w.data.shape[1] != x.data.shape[0]:
        raise ValueError(
            "dense: incompatible shapes w=%s x=%s" % (w.data.shape, x.data.shape)
        )
    out = Tensor(w.data @ x.data + b.data, (x, w, b))

    def bw(g):
        _accum(x, w.data.T @ g)
        _accum(w, np.outer(g, x.data))
        _accum(b, g)

    out._backward = bw
    return out
