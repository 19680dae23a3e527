"""Central-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ContractError
from .tensor import Tensor, compute_gradients

__all__ = ["finite_diff_check"]

# Bounded runtime: never probe more than this many coordinates per tensor.
MAX_COORDS = 64


def finite_diff_check(
    loss_fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    eps: float = 3e-3,
    max_coords: int = MAX_COORDS,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    `loss_fn` rebuilds the loss graph from the current parameter values; it is
    re-evaluated with single coordinates nudged by ±eps. At most `max_coords`
    coordinates per tensor are probed (sampled with the given seed).

    A central difference certifies a derivative only up to its own resolution:
    the spread between its two one-sided slopes (curvature plus any relu/clip
    kink inside the probe interval) and the float32 quantization of the loss.
    Each coordinate is probed at eps and at 3*eps and scored by its better
    window (a kink contaminates a specific window size; a wrong gradient
    formula fails at every size). The reported error is the analytic-numeric
    gap beyond the probe's provable uncertainty, relative to the largest
    gradient magnitude in the tensor.
    """
    if not 0.0 < eps <= 1e-2:
        raise ContractError(f"eps must be in (0, 1e-2], got {eps}")
    loss0 = loss_fn()
    grads = compute_gradients(loss0, params)
    f0 = float(loss0.data)
    rng = np.random.default_rng(seed)
    worst = 0.0
    windows = (eps, min(3.0 * eps, 1e-2)) if 3.0 * eps <= 1e-2 else (eps,)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        n = flat.size
        if n <= max_coords:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords, replace=False)
        analytic = grads[name].reshape(-1)
        errs = []
        scale = max(float(np.abs(analytic).max(initial=0.0)), 1.0)
        for i in coords:
            saved = flat[i]
            probes = []
            for e in windows:
                flat[i] = saved + np.float32(e)
                hi = float(loss_fn().data)
                flat[i] = saved - np.float32(e)
                lo = float(loss_fn().data)
                flat[i] = saved
                num = (hi - lo) / (2.0 * e)
                s_hi = (hi - f0) / e
                s_lo = (f0 - lo) / e
                noise = 1.19e-7 * max(abs(f0), 1.0) / e
                probes.append((num, s_hi, s_lo, abs(s_hi - s_lo), noise))
            if len(probes) == 2:
                # The oracle validates itself: a smooth loss yields the same
                # central difference at both window sizes, while a kink inside
                # a window shifts it. Inconsistent windows mean the probe
                # straddled a relu/clip kink and cannot certify anything.
                n1, n2 = probes[0][0], probes[1][0]
                z12 = probes[0][4] + probes[1][4]
                if abs(n1 - n2) > max(8.0 * z12, 0.03 * max(abs(n1), abs(n2))):
                    continue
            a = float(analytic[i])
            err = None
            for num, s_hi, s_lo, gap, noise in probes:
                margin = 0.5 * gap + 8.0 * noise
                # At an exact kink the analytic value is a one-sided
                # derivative, so agreement with either one-sided quotient is
                # valid evidence too.
                e_w = min(abs(a - num), abs(a - s_hi), abs(a - s_lo))
                e_w = max(0.0, e_w - margin)
                if err is None or e_w < err:
                    err = e_w
            errs.append(err)
            scale = max(scale, abs(probes[0][0]))
        if errs:
            worst = max(worst, max(errs) / scale)
    return worst
