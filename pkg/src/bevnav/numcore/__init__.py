"""Dense float32 tensors, reverse-mode gradients, Adam, and gradient checking."""

from .gradcheck import finite_diff_check
from .optim import OptimState, adam_step
from .tensor import (
    Tensor,
    add,
    as_tensor,
    clip,
    compute_gradients,
    concat,
    conv2d,
    dense,
    exp,
    im2col,
    l2_normalize,
    log,
    logsumexp,
    matmul,
    minimum,
    mul,
    relu,
    reshape,
    sigmoid,
    softmax,
    sqrt,
    tanh,
    tmean,
    transpose,
    tsum,
    upsample2x,
)

__all__ = [
    "Tensor",
    "as_tensor",
    "add",
    "mul",
    "matmul",
    "exp",
    "log",
    "sqrt",
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
    "OptimState",
    "adam_step",
    "finite_diff_check",
]
