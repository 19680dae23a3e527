"""Seeded parameter initializers shared by the conv/dense models."""

from __future__ import annotations

import numpy as np

from .numcore import Tensor


def conv_param(rng: np.random.Generator, out_c: int, in_c: int, k: int = 3) -> Tensor:
    fan_in = in_c * k * k
    w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_c, in_c, k, k))
    return Tensor(w.astype(np.float32), requires_grad=True)


def dense_param(rng: np.random.Generator, n_in: int, n_out: int) -> Tensor:
    w = rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out))
    return Tensor(w.astype(np.float32), requires_grad=True)


def zeros_param(*shape: int) -> Tensor:
    return Tensor(np.zeros(shape, dtype=np.float32), requires_grad=True)
