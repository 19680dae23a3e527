"""Bias-corrected adaptive-moment optimizer over named parameter dicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from .tensor import Tensor

__all__ = ["OptimState", "adam_step"]


@dataclass
class OptimState:
    """Per-parameter first/second moments plus hyperparameters.

    `t` counts completed steps; `v` stays elementwise nonnegative.
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, Tensor], grads: dict[str, np.ndarray], state: OptimState
) -> OptimState:
    """One in-place adaptive-moment update of `params` from `grads`.

    Moments are lazily initialized to zeros on first use; shapes must agree
    with the parameters on every call.
    """
    state.t += 1
    b1 = np.float32(state.beta1)
    b2 = np.float32(state.beta2)
    c1 = np.float32(1.0 - state.beta1 ** state.t)
    c2 = np.float32(1.0 - state.beta2 ** state.t)
    lr = np.float32(state.lr)
    eps = np.float32(state.eps)
    for name, p in params.items():
        if name not in grads:
            raise ContractError(f"missing gradient for parameter '{name}'")
        g = np.asarray(grads[name], dtype=np.float32)
        if g.shape != p.data.shape:
            raise ContractError(
                f"gradient shape {g.shape} does not match parameter '{name}' shape {p.data.shape}"
            )
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = b1 * m + (np.float32(1.0) - b1) * g
        v = b2 * v + (np.float32(1.0) - b2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state
