"""Reverse-mode automatic differentiation over dense float32 arrays.

A ``Tensor`` wraps a numpy float32 array and remembers how it was produced, so
a scalar loss can be differentiated with respect to every parameter that fed
it. The op set is exactly what the models in this package need: elementwise
arithmetic, matmul, the usual nonlinearities, reductions, shape moves, a
stable logsumexp, and im2col/upsample primitives for convolutions. Everything
is single-threaded and deterministic; there is no hidden global RNG.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, NumericError

__all__ = [
    "Tensor",
    "as_tensor",
    "add",
    "mul",
    "matmul",
    "exp",
    "log",
    "tanh",
    "sigmoid",
    "relu",
    "clip",
    "minimum",
    "tsum",
    "tmean",
    "logsumexp",
    "softmax",
    "reshape",
    "transpose",
    "concat",
    "im2col",
    "upsample2x",
    "conv2d",
    "dense",
    "l2_normalize",
    "compute_gradients",
]


def _f32(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float32)
    return a


class Tensor:
    """Node in a scalar-rooted computation graph.

    `data` is always a float32 ndarray in row-major order. Leaves created with
    ``requires_grad=True`` receive their gradient in ``.grad`` after a
    backward pass; interior nodes are transient.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = _f32(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None
        self.name = name

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        tag = f" '{self.name}'" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape}, grad={self.requires_grad})"

    # -- operator sugar --------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __truediv__(self, other):
        other = as_tensor(other)
        return mul(self, power(other, -1.0))

    def __rtruediv__(self, other):
        return mul(as_tensor(other), power(self, -1.0))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, key):
        return _getitem(self, key)

    # -- autodiff ---------------------------------------------------------------

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's ``.grad``.

        ``self`` must be a finite scalar.
        """
        if self.data.size != 1:
            raise ContractError(f"backward() needs a scalar, got shape {self.data.shape}")
        if not np.isfinite(self.data):
            label = self.name or "loss"
            raise NumericError(f"non-finite value in loss term '{label}'")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                if node.grad is None:
                    node.grad = g.copy()
                else:
                    node.grad = node.grad + g
            if node._backward is not None:
                for parent, pg in node._backward(g):
                    if pg is None:
                        continue
                    key = id(parent)
                    if key in grads:
                        grads[key] = grads[key] + pg
                    else:
                        grads[key] = pg

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape`, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.astype(np.float32, copy=False)


# -- elementwise arithmetic ------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def back(g):
        return ((a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(g, b.data.shape)))

    return _node(out, (a, b), back)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def back(g):
        return (
            (a, _unbroadcast(g * b.data, a.data.shape)),
            (b, _unbroadcast(g * a.data, b.data.shape)),
        )

    return _node(out, (a, b), back)


def power(a, p: float) -> Tensor:
    a = as_tensor(a)
    p = float(p)
    out = a.data**np.float32(p)

    def back(g):
        return ((a, g * np.float32(p) * a.data ** np.float32(p - 1.0)),)

    return _node(out, (a,), back)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)

    def back(g):
        return ((a, g * out),)

    return _node(out, (a,), back)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = np.log(a.data)

    def back(g):
        return ((a, g / a.data),)

    return _node(out, (a,), back)


def sqrt(a) -> Tensor:
    return power(a, 0.5)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)

    def back(g):
        return ((a, g * (1.0 - out * out)),)

    return _node(out, (a,), back)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = np.empty_like(a.data)
    pos = a.data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
    e = np.exp(a.data[~pos])
    out[~pos] = e / (1.0 + e)

    def back(g):
        return ((a, g * out * (1.0 - out)),)

    return _node(out, (a,), back)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def back(g):
        return ((a, g * (a.data > 0)),)

    return _node(out, (a,), back)


def softplus(a) -> Tensor:
    """log(1 + exp(a)), computed without overflow; gradient is sigmoid(a)."""
    a = as_tensor(a)
    out = np.logaddexp(np.float32(0.0), a.data).astype(np.float32)

    def back(g):
        sig = np.empty_like(a.data)
        pos = a.data >= 0
        sig[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
        e = np.exp(a.data[~pos])
        sig[~pos] = e / (1.0 + e)
        return ((a, g * sig),)

    return _node(out, (a,), back)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient passes through strictly inside [lo, hi]."""
    a = as_tensor(a)
    out = np.clip(a.data, np.float32(lo), np.float32(hi))

    def back(g):
        mask = (a.data > lo) & (a.data < hi)
        return ((a, g * mask),)

    return _node(out, (a,), back)


def minimum(a, b) -> Tensor:
    """Elementwise min; gradient follows the smaller branch (ties go to `a`)."""
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data <= b.data
    out = np.where(take_a, a.data, b.data)

    def back(g):
        return (
            (a, _unbroadcast(g * take_a, a.data.shape)),
            (b, _unbroadcast(g * ~take_a, b.data.shape)),
        )

    return _node(out, (a, b), back)


# -- reductions -------------------------------------------------------------------


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims, dtype=np.float32)

    def back(g):
        if axis is None:
            return ((a, np.broadcast_to(g, a.data.shape).astype(np.float32)),)
        gg = g
        if not keepdims:
            gg = np.expand_dims(gg, axis)
        return ((a, np.broadcast_to(gg, a.data.shape).astype(np.float32)),)

    return _node(np.asarray(out, dtype=np.float32), (a,), back)


def tmean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        n = a.data.size
    elif isinstance(axis, int):
        n = a.data.shape[axis]
    else:
        n = int(np.prod([a.data.shape[i] for i in axis]))
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def logsumexp(a, axis: int, keepdims: bool = False) -> Tensor:
    """Stable log-sum-exp along one axis; gradient is the softmax."""
    a = as_tensor(a)
    m = np.max(a.data, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0).astype(np.float32)
    s = np.exp(a.data - m).sum(axis=axis, keepdims=True, dtype=np.float32)
    out = np.log(s) + m
    soft = np.exp(a.data - m) / s
    if not keepdims:
        out = np.squeeze(out, axis=axis)

    def back(g):
        gg = g if keepdims else np.expand_dims(g, axis)
        return ((a, (gg * soft).astype(np.float32)),)

    return _node(out.astype(np.float32), (a,), back)


def softmax(a, axis: int) -> Tensor:
    return exp(a - logsumexp(a, axis=axis, keepdims=True))


# -- shape moves ----------------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def back(g):
        return ((a, g.reshape(a.data.shape)),)

    return _node(out, (a,), back)


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    out = np.ascontiguousarray(a.data.transpose(axes))

    def back(g):
        return ((a, np.ascontiguousarray(g.transpose(inv))),)

    return _node(out, (a,), back)


def concat(parts, axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        grads = []
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(int(lo), int(hi))
            grads.append((p, np.ascontiguousarray(g[tuple(idx)])))
        return tuple(grads)

    return _node(out, tuple(parts), back)


def _getitem(a: Tensor, key) -> Tensor:
    out = a.data[key]

    def back(g):
        full = np.zeros_like(a.data)
        full[key] = g
        return ((a, full),)

    return _node(np.ascontiguousarray(out), (a,), back)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ContractError(
            f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}"
        )
    out = a.data @ b.data

    def back(g):
        return ((a, g @ b.data.T), (b, a.data.T @ g))

    return _node(out, (a, b), back)


# -- convolution building blocks ---------------------------------------------------


def im2col(x, kh: int, kw: int, stride: int = 1, pad: int = 0) -> Tensor:
    """Unfold (B, C, H, W) into (B*OH*OW, C*kh*kw) patches.

    Backward scatters gradients back with the matching col2im.
    """
    x = as_tensor(x)
    b, c, h, w = x.data.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    cols = np.empty((b, c, kh, kw, oh, ow), dtype=np.float32)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    out = cols.transpose(0, 4, 5, 1, 2, 3).reshape(b * oh * ow, c * kh * kw)

    def back(g):
        gc = g.reshape(b, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
        gxp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=np.float32)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += gc[
                    :, :, i, j
                ]
        if pad:
            gxp = gxp[:, :, pad:-pad, pad:-pad]
        return ((x, np.ascontiguousarray(gxp)),)

    return _node(out, (x,), back)


def upsample2x(x) -> Tensor:
    """Nearest-neighbor 2x upsampling of (B, C, H, W)."""
    x = as_tensor(x)
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)
    b, c, h, w = x.data.shape

    def back(g):
        return ((x, g.reshape(b, c, h, 2, w, 2).sum(axis=(3, 5), dtype=np.float32)),)

    return _node(out, (x,), back)


def conv2d(x, w, bias=None, stride: int = 1, pad: int = 1) -> Tensor:
    """2-D convolution; weight shape (out_c, in_c, kh, kw), input (B, C, H, W)."""
    x, w = as_tensor(x), as_tensor(w)
    b, c, h, width = x.data.shape
    oc, ic, kh, kw = w.data.shape
    if ic != c:
        raise ContractError(f"conv2d channel mismatch: input {c}, weight expects {ic}")
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (width + 2 * pad - kw) // stride + 1
    cols = im2col(x, kh, kw, stride=stride, pad=pad)
    wmat = reshape(w, (oc, ic * kh * kw))
    y = matmul(cols, transpose(wmat, (1, 0)))
    if bias is not None:
        y = add(y, bias)
    y = reshape(y, (b, oh, ow, oc))
    return transpose(y, (0, 3, 1, 2))


def dense(x, w, bias=None) -> Tensor:
    y = matmul(x, w)
    if bias is not None:
        y = add(y, bias)
    return y


def l2_normalize(x, axis: int = -1, eps: float = 1e-8) -> Tensor:
    """Rows scaled to unit Euclidean norm (stabilized near zero)."""
    sq = tsum(mul(x, x), axis=axis, keepdims=True)
    return mul(x, power(add(sq, eps), -0.5))


def compute_gradients(loss: Tensor, params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    """Differentiate a finite scalar loss with respect to named parameters.

    Returns one gradient array per parameter, matching its shape. Raises
    ``NumericError`` (naming the loss) if the loss is non-finite; parameters
    unreachable from the loss get zero gradients.
    """
    for p in params.values():
        p.grad = None
        p.requires_grad = True
    loss.backward()
    grads = {}
    for name, p in params.items():
        grads[name] = np.zeros_like(p.data) if p.grad is None else p.grad
        p.grad = None
    return grads
