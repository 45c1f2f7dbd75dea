"""Reverse-mode automatic differentiation over dense float64 arrays.

A :class:`Tensor` wraps a numpy array (images use N×C×H×W layout) and,
when an operation produces it, remembers its inputs together with a
gradient rule. :func:`backward` walks the recorded graph once in reverse
topological order and accumulates d(loss)/d(leaf) into every leaf that
was created with ``requires_grad=True``.

A graph belongs to the thread that builds it; finished tensors are plain
values and may be shared freely. All arithmetic is double precision so
that finite-difference checks (:func:`grad_check`) are meaningful.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError


class Tensor:
    """Dense float64 array plus an optional gradient."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backprop")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise NumericError("tensor initialized with non-finite values")
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backprop = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a scalar, got shape {self.shape}")
        return float(self.data)

    def detach(self) -> "Tensor":
        """Same values, cut loose from the graph."""
        out = _result(self.data, (), None)
        return out

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # small operator sugar; the named functions below do the real work
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


def _result(data, parents, backprop) -> Tensor:
    # Internal constructor for op outputs; skips the finiteness scan
    # (enforced at the loss boundary and by the trainer instead).
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    req = any(p.requires_grad for p in parents)
    out.requires_grad = req
    out._parents = tuple(parents) if req else ()
    out._backprop = backprop if req else None
    return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _accum(t: Tensor, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g, shape):
    """Sum g down to `shape` (inverse of numpy broadcasting)."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def backward(loss: Tensor) -> None:
    """Populate .grad on every requires_grad leaf reachable from `loss`.

    `loss` must be scalar and finite. Each graph node is visited exactly
    once, in reverse topological order, so repeated runs over the same
    graph construction are bit-identical.
    """
    if loss.data.size != 1:
        raise DimensionError(f"backward expects a scalar loss, got shape {loss.shape}")
    if not np.isfinite(loss.data).all():
        raise NumericError("backward called on a non-finite loss")

    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, children_done = stack.pop()
        if children_done:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backprop is not None and node.grad is not None:
            node._backprop(node.grad)


# ---------------------------------------------------------------------------
# elementwise and reduction primitives
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def backprop(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _result(data, (a, b), backprop)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data - b.data

    def backprop(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, -_unbroadcast(g, b.shape))

    return _result(data, (a, b), backprop)


def mul(a, b) -> Tensor:
    """Elementwise (broadcasting) product; covers scaling by a learnable scalar."""
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def backprop(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _result(data, (a, b), backprop)


def scale(t: Tensor, k: float) -> Tensor:
    k = float(k)

    def backprop(g):
        _accum(t, g * k)

    return _result(t.data * k, (t,), backprop)


def square(t: Tensor) -> Tensor:
    def backprop(g):
        _accum(t, 2.0 * t.data * g)

    return _result(t.data * t.data, (t,), backprop)


def concat(tensors, axis: int) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    base = tensors[0].data.shape
    for t in tensors[1:]:
        s = t.data.shape
        if len(s) != len(base) or any(
            i != axis and s[i] != base[i] for i in range(len(base))
        ):
            bad = next(i for i in range(len(base)) if i != axis and s[i] != base[i])
            raise DimensionError(
                f"concat: operand shape {s} differs from {base} on axis {bad}"
            )
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backprop(g):
        for t, s0, s1 in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(int(s0), int(s1))
            _accum(t, g[tuple(sl)])

    return _result(data, tuple(tensors), backprop)


def mean(t: Tensor) -> Tensor:
    data = np.asarray(t.data.mean())

    def backprop(g):
        _accum(t, np.full(t.data.shape, float(g) / t.data.size))

    return _result(data, (t,), backprop)


def tsum(t: Tensor) -> Tensor:
    data = np.asarray(t.data.sum())

    def backprop(g):
        _accum(t, np.full(t.data.shape, float(g)))

    return _result(data, (t,), backprop)


def l1_norm(t: Tensor) -> Tensor:
    """Sum of absolute values. Subgradient 0 at exact zeros."""
    data = np.asarray(np.abs(t.data).sum())

    def backprop(g):
        _accum(t, np.sign(t.data) * float(g))

    return _result(data, (t,), backprop)


def l2_norm(t: Tensor) -> Tensor:
    """Euclidean norm sqrt(sum x^2)."""
    v = float(np.sqrt((t.data * t.data).sum()))
    data = np.asarray(v)

    def backprop(g):
        _accum(t, t.data / max(v, 1e-12) * float(g))

    return _result(data, (t,), backprop)


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

def relu(t: Tensor) -> Tensor:
    data = np.maximum(t.data, 0.0)

    def backprop(g):
        _accum(t, g * (t.data > 0.0))

    return _result(data, (t,), backprop)


def leaky_relu(t: Tensor, slope: float = 0.2) -> Tensor:
    data = np.where(t.data > 0.0, t.data, slope * t.data)

    def backprop(g):
        _accum(t, g * np.where(t.data > 0.0, 1.0, slope))

    return _result(data, (t,), backprop)


def sigmoid(t: Tensor) -> Tensor:
    e = np.exp(-np.abs(t.data))
    data = np.where(t.data >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))

    def backprop(g):
        _accum(t, g * data * (1.0 - data))

    return _result(data, (t,), backprop)


def tanh(t: Tensor) -> Tensor:
    data = np.tanh(t.data)

    def backprop(g):
        _accum(t, g * (1.0 - data * data))

    return _result(data, (t,), backprop)


def log_floor(t: Tensor, eps: float = 1e-12) -> Tensor:
    """log(max(x, eps)); the floor keeps early-training losses finite."""
    m = np.maximum(t.data, eps)
    data = np.log(m)

    def backprop(g):
        _accum(t, g * (t.data >= eps) / m)

    return _result(data, (t,), backprop)


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax; slices along `axis` sum to 1."""
    x = t.data
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    s = e / e.sum(axis=axis, keepdims=True)

    def backprop(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        _accum(t, s * (g - dot))

    return _result(s, (t,), backprop)


# ---------------------------------------------------------------------------
# shape ops
# ---------------------------------------------------------------------------

def reshape(t: Tensor, shape) -> Tensor:
    data = t.data.reshape(shape)

    def backprop(g):
        _accum(t, g.reshape(t.data.shape))

    return _result(data, (t,), backprop)


def transpose_last2(t: Tensor) -> Tensor:
    data = t.data.swapaxes(-1, -2)

    def backprop(g):
        _accum(t, g.swapaxes(-1, -2))

    return _result(data, (t,), backprop)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product (..., n, m) @ (..., m, p); batch dims must match."""
    ad, bd = a.data, b.data
    if ad.ndim < 2 or bd.ndim < 2:
        raise DimensionError("matmul operands need at least 2 dimensions")
    if ad.shape[-1] != bd.shape[-2]:
        raise DimensionError(
            f"matmul: inner axes disagree, {ad.shape[-1]} (a axis {ad.ndim - 1}) "
            f"vs {bd.shape[-2]} (b axis {bd.ndim - 2})"
        )
    if ad.shape[:-2] != bd.shape[:-2]:
        raise DimensionError(
            f"matmul: batch dims {ad.shape[:-2]} vs {bd.shape[:-2]}"
        )
    data = ad @ bd

    def backprop(g):
        _accum(a, g @ bd.swapaxes(-1, -2))
        _accum(b, ad.swapaxes(-1, -2) @ g)

    return _result(data, (a, b), backprop)


# ---------------------------------------------------------------------------
# convolution / pooling
# ---------------------------------------------------------------------------

def _windows(xp, k, stride, oh, ow):
    s = xp.strides
    return np.lib.stride_tricks.as_strided(
        xp,
        shape=(xp.shape[0], xp.shape[1], oh, ow, k, k),
        strides=(s[0], s[1], s[2] * stride, s[3] * stride, s[2], s[3]),
        writeable=False,
    )


def _out_dim(size, k, stride, padding):
    return (size + 2 * padding - k) // stride + 1


def _conv_fwd(x, w, stride, padding):
    n, c, h, wdt = x.shape
    k = w.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    oh = _out_dim(h, k, stride, padding)
    ow = _out_dim(wdt, k, stride, padding)
    if oh < 1 or ow < 1:
        raise DimensionError(
            f"conv: kernel {k} does not fit input {h}×{wdt} with padding {padding}"
        )
    win = _windows(xp, k, stride, oh, ow)
    return np.einsum("ocij,nchwij->nohw", w, win, optimize=True)


def _conv_dw(x, g, k, stride, padding):
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    win = _windows(xp, k, stride, g.shape[2], g.shape[3])
    return np.einsum("nohw,nchwij->ocij", g, win, optimize=True)


def _conv_dx(g, w, x_shape, stride, padding):
    n, c, h, wdt = x_shape
    k = w.shape[2]
    hp, wp = h + 2 * padding, wdt + 2 * padding
    oh, ow = g.shape[2], g.shape[3]
    dxp = np.zeros((n, c, hp, wp))
    for i in range(k):
        for j in range(k):
            contrib = np.tensordot(g, w[:, :, i, j], axes=([1], [0]))  # n,oh,ow,c
            dxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                contrib.transpose(0, 3, 1, 2)
            )
    if padding:
        return dxp[:, :, padding : padding + h, padding : padding + wdt]
    return dxp


def conv2d(x: Tensor, w: Tensor, b: Tensor | None, stride: int = 1, padding: int = 0) -> Tensor:
    """2-D convolution, weights (Cout, Cin, k, k), square kernels."""
    xd, wd = x.data, w.data
    if xd.ndim != 4:
        raise DimensionError(f"conv2d: input must be N×C×H×W, got {xd.shape}")
    if wd.ndim != 4 or wd.shape[2] != wd.shape[3]:
        raise DimensionError(f"conv2d: weights must be Cout×Cin×k×k, got {wd.shape}")
    if xd.shape[1] != wd.shape[1]:
        raise DimensionError(
            f"conv2d: input channels {xd.shape[1]} (axis 1) != kernel Cin {wd.shape[1]}"
        )
    if b is not None and b.data.shape != (wd.shape[0],):
        raise DimensionError(
            f"conv2d: bias shape {b.data.shape} != ({wd.shape[0]},) (axis 0)"
        )
    k = wd.shape[2]
    out = _conv_fwd(xd, wd, stride, padding)
    if b is not None:
        out += b.data.reshape(1, -1, 1, 1)
    parents = (x, w) if b is None else (x, w, b)

    def backprop(g):
        if b is not None:
            _accum(b, g.sum(axis=(0, 2, 3)))
        if w.requires_grad:
            _accum(w, _conv_dw(xd, g, k, stride, padding))
        if x.requires_grad:
            _accum(x, _conv_dx(g, wd, xd.shape, stride, padding))

    return _result(out, parents, backprop)


def _dilate(x, stride):
    if stride == 1:
        return x
    n, c, h, w = x.shape
    out = np.zeros((n, c, (h - 1) * stride + 1, (w - 1) * stride + 1))
    out[:, :, ::stride, ::stride] = x
    return out


def conv_transpose2d(x: Tensor, w: Tensor, b: Tensor | None, stride: int = 1) -> Tensor:
    """Transposed convolution, weights (Cin, Cout, k, k), no padding.

    Output spatial size is (H-1)·stride + k. With a shared weight array
    this operation is the exact adjoint of conv2d at the same stride and
    zero padding.
    """
    xd, wd = x.data, w.data
    if xd.ndim != 4:
        raise DimensionError(f"conv_transpose2d: input must be N×C×H×W, got {xd.shape}")
    if wd.ndim != 4 or wd.shape[2] != wd.shape[3]:
        raise DimensionError(
            f"conv_transpose2d: weights must be Cin×Cout×k×k, got {wd.shape}"
        )
    if xd.shape[1] != wd.shape[0]:
        raise DimensionError(
            f"conv_transpose2d: input channels {xd.shape[1]} (axis 1) != kernel Cin {wd.shape[0]}"
        )
    if b is not None and b.data.shape != (wd.shape[1],):
        raise DimensionError(
            f"conv_transpose2d: bias shape {b.data.shape} != ({wd.shape[1]},) (axis 1)"
        )
    k = wd.shape[2]
    xdil = _dilate(xd, stride)
    # conv with in/out swapped and spatially flipped weights on the dilated input
    w_conv = wd.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1]
    out = _conv_fwd(xdil, np.ascontiguousarray(w_conv), 1, k - 1)
    if b is not None:
        out += b.data.reshape(1, -1, 1, 1)
    parents = (x, w) if b is None else (x, w, b)

    def backprop(g):
        if b is not None:
            _accum(b, g.sum(axis=(0, 2, 3)))
        if w.requires_grad:
            dw_conv = _conv_dw(xdil, g, k, 1, k - 1)
            _accum(w, np.ascontiguousarray(dw_conv.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1]))
        if x.requires_grad:
            # adjoint of the adjoint: a plain forward convolution
            _accum(x, _conv_fwd(g, wd, stride, 0))

    return _result(out, parents, backprop)


def maxpool2(x: Tensor) -> Tensor:
    """2×2 stride-2 max pooling; gradient goes to the first max in row-major scan."""
    n, c, h, w = x.data.shape
    if h % 2 or w % 2:
        raise DimensionError(f"maxpool2: spatial dims must be even, got {h}×{w}")
    blocks = (
        x.data.reshape(n, c, h // 2, 2, w // 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h // 2, w // 2, 4)
    )
    idx = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]

    def backprop(g):
        db = np.zeros_like(blocks)
        np.put_along_axis(db, idx[..., None], g[..., None], axis=-1)
        dx = (
            db.reshape(n, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h, w)
        )
        _accum(x, dx)

    return _result(out, (x,), backprop)


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

def grad_check(
    fn,
    shapes,
    seed: int = 0,
    h: float = 1e-5,
    max_coords: int = 64,
    floor: float = 1e-8,
) -> float:
    """Compare analytic gradients of `fn` against central differences.

    `shapes` is a list whose entries are either shape tuples (filled with
    seeded standard-normal leaves) or ready-made Tensors (checked as
    given, letting callers probe network weights). If `fn` returns a
    non-scalar, it is projected onto a fixed random direction so every
    output element influences the loss. Returns the max relative error,
    |analytic - numeric| / max(|analytic|, |numeric|, floor).
    """
    rng = np.random.default_rng(seed)
    inputs = []
    for s in shapes:
        if isinstance(s, Tensor):
            inputs.append(s)
        else:
            inputs.append(Tensor(rng.standard_normal(s), requires_grad=True))

    proj = None

    def run():
        nonlocal proj
        out = fn(*inputs)
        if out.data.size == 1:
            return out
        if proj is None:
            proj = Tensor(np.random.default_rng(seed + 1).standard_normal(out.shape))
        return tsum(mul(out, proj))

    for t in inputs:
        t.zero_grad()
    loss = run()
    backward(loss)
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    worst = 0.0
    for t, ga in zip(inputs, analytic):
        if not t.requires_grad:
            continue
        total = t.data.size
        if total <= max_coords:
            coords = np.arange(total)
        else:
            coords = rng.choice(total, size=max_coords, replace=False)
        flat = t.data.reshape(-1)
        for ci in coords:
            orig = flat[ci]
            flat[ci] = orig + h
            fp = float(run().data)
            flat[ci] = orig - h
            fm = float(run().data)
            flat[ci] = orig
            numeric = (fp - fm) / (2.0 * h)
            a = float(ga.reshape(-1)[ci])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, rel)
    return worst
