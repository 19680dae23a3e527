"""Variational autoencoder over binary BEV road masks.

The encoder maps a 64x64 occupancy raster to a 32-dimensional diagonal
Gaussian; the decoder maps a latent back to per-pixel road probabilities.
Training minimizes pixel-summed binary cross-entropy plus a weighted KL pull
toward the standard normal, so nearby road layouts land on nearby latents.
The deterministic embedding used for anchors and for contrastive targets is
the posterior mean, never a sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._layers import conv_param, dense_param, zeros_param
from .errors import ContractError
from .numcore import (
    OptimState,
    Tensor,
    adam_step,
    clip,
    compute_gradients,
    conv2d,
    dense,
    exp,
    log,
    mul,
    relu,
    reshape,
    sigmoid,
    transpose,
    tsum,
    upsample2x,
)

LATENT_DIM = 32


@dataclass(frozen=True)
class GaussianParams:
    """Diagonal Gaussian over the latent space; scale is strictly positive."""

    mean: np.ndarray
    scale: np.ndarray


@dataclass
class VaeConfig:
    latent_dim: int = LATENT_DIM
    beta: float = 1.0
    conv_widths: tuple = (16, 32, 64)
    epochs: int = 20
    batch_size: int = 64
    lr: float = 1e-3
    image_size: int = 64

    def __post_init__(self):
        self.conv_widths = tuple(self.conv_widths)
        if self.latent_dim != LATENT_DIM:
            raise ContractError(f"latent_dim is fixed at {LATENT_DIM}")
        if self.beta < 0:
            raise ContractError("beta must be nonnegative")
        if len(self.conv_widths) != 3:
            raise ContractError("expected 3 conv widths")
        if self.image_size % 8 != 0:
            raise ContractError("image_size must be divisible by 8")


def init_vae_params(cfg: VaeConfig, seed: int) -> dict[str, Tensor]:
    rng = np.random.default_rng(seed)
    c1, c2, c3 = cfg.conv_widths
    base = cfg.image_size // 8
    flat = base * base * c3
    p = {
        "enc.conv0.w": conv_param(rng, c1, 1),
        "enc.conv0.b": zeros_param(c1),
        "enc.conv1.w": conv_param(rng, c2, c1),
        "enc.conv1.b": zeros_param(c2),
        "enc.conv2.w": conv_param(rng, c3, c2),
        "enc.conv2.b": zeros_param(c3),
        "enc.fc.w": dense_param(rng, flat, 2 * LATENT_DIM),
        "enc.fc.b": zeros_param(2 * LATENT_DIM),
        "dec.fc.w": dense_param(rng, LATENT_DIM, flat),
        "dec.fc.b": zeros_param(flat),
        "dec.conv0.w": conv_param(rng, c2, c3),
        "dec.conv0.b": zeros_param(c2),
        "dec.conv1.w": conv_param(rng, c1, c2),
        "dec.conv1.b": zeros_param(c1),
        "dec.conv2.w": conv_param(rng, 4, c1),
        "dec.conv2.b": zeros_param(4),
    }
    return p


def _vae_dims(params: dict[str, Tensor]) -> tuple[int, int]:
    c3 = params["enc.conv2.w"].data.shape[0]
    flat = params["dec.fc.w"].data.shape[1]
    base = int(round((flat // c3) ** 0.5))
    return c3, base


def _as_batch(x: np.ndarray, image_size: int | None = None) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ContractError(f"expected (H, W) or (B, H, W) BEV input, got {x.shape}")
    if image_size is not None and x.shape[1:] != (image_size, image_size):
        raise ContractError(f"BEV shape {x.shape[1:]} != ({image_size}, {image_size})")
    return x.astype(np.float32)


def _encode_graph(x: Tensor, params: dict[str, Tensor]) -> tuple[Tensor, Tensor]:
    h = relu(conv2d(x, params["enc.conv0.w"], params["enc.conv0.b"], stride=2, pad=1))
    h = relu(conv2d(h, params["enc.conv1.w"], params["enc.conv1.b"], stride=2, pad=1))
    h = relu(conv2d(h, params["enc.conv2.w"], params["enc.conv2.b"], stride=2, pad=1))
    b = h.shape[0]
    flat = reshape(h, (b, -1))
    out = dense(flat, params["enc.fc.w"], params["enc.fc.b"])
    return out[:, :LATENT_DIM], out[:, LATENT_DIM:]


def _depth_to_space2(x: Tensor) -> Tensor:
    b, c4, h, w = x.shape
    y = reshape(x, (b, c4 // 4, 2, 2, h, w))
    y = transpose(y, (0, 1, 4, 2, 5, 3))
    return reshape(y, (b, c4 // 4, 2 * h, 2 * w))


def _decode_logits_graph(z: Tensor, params: dict[str, Tensor]) -> Tensor:
    c3, base = _vae_dims(params)
    h = relu(dense(z, params["dec.fc.w"], params["dec.fc.b"]))
    h = reshape(h, (z.shape[0], c3, base, base))
    h = relu(conv2d(upsample2x(h), params["dec.conv0.w"], params["dec.conv0.b"], pad=1))
    h = relu(conv2d(upsample2x(h), params["dec.conv1.w"], params["dec.conv1.b"], pad=1))
    h = conv2d(h, params["dec.conv2.w"], params["dec.conv2.b"], pad=1)
    return _depth_to_space2(h)


def _decode_graph(z: Tensor, params: dict[str, Tensor]) -> Tensor:
    return sigmoid(_decode_logits_graph(z, params))


def encode(x: np.ndarray, params: dict[str, Tensor]) -> GaussianParams:
    """Posterior Gaussian for one BEV image or a batch of them."""
    single = np.asarray(x).ndim == 2
    xb = _as_batch(x)
    _, base = _vae_dims(params)
    if xb.shape[1] != base * 8:
        raise ContractError(f"BEV shape {xb.shape[1:]} does not match model ({base * 8})")
    mu, logsig = _encode_graph(Tensor(xb[:, None]), params)
    mean, scale = mu.data, np.exp(logsig.data)
    if single:
        mean, scale = mean[0], scale[0]
    return GaussianParams(mean=mean, scale=scale)


def sample_latent(g: GaussianParams, rng: np.random.Generator) -> np.ndarray:
    """Reparameterized draw mean + scale * eps with eps ~ N(0, I)."""
    eps = rng.standard_normal(g.mean.shape).astype(np.float32)
    return g.mean + g.scale * eps


def decode(z: np.ndarray, params: dict[str, Tensor]) -> np.ndarray:
    """Per-pixel road probabilities, strictly inside (0, 1)."""
    z = np.asarray(z, dtype=np.float32)
    single = z.ndim == 1
    if single:
        z = z[None]
    if z.shape[1] != LATENT_DIM:
        raise ContractError(f"latent dim {z.shape[1]} != {LATENT_DIM}")
    probs = _decode_graph(Tensor(z), params).data[:, 0]
    return probs[0] if single else probs


def embed_mean(x: np.ndarray, params: dict[str, Tensor]) -> np.ndarray:
    """Deterministic latent(s): the posterior mean, used for anchors/targets."""
    return encode(x, params).mean


def kl_standard_normal(mu: Tensor, logsig: Tensor) -> Tensor:
    """KL(N(mu, sigma^2) || N(0, 1)) summed over latent dims and batch."""
    sig2 = exp(mul(logsig, 2.0))
    per = mul(tsum(sig2 + mul(mu, mu) - 1.0 - mul(logsig, 2.0)), 0.5)
    return per


# Logit magnitude equivalent to clamping probabilities at [1e-6, 1 - 1e-6];
# applying the clamp in logit space keeps the float32 loss smooth where the
# probability-space form staircases near saturation.
_LOGIT_CLAMP = 13.815511


def bce_pixels(probs: Tensor, targets: Tensor) -> Tensor:
    """Pixel-summed binary cross-entropy of probabilities clamped to [1e-6, 1-1e-6]."""
    p = clip(probs, 1e-6, 1.0 - 1e-6)
    return tsum(mul(targets, log(p)) + mul(1.0 - targets, log(1.0 - p))) * -1.0


def bce_logits(logits: Tensor, targets: Tensor) -> Tensor:
    """The same clamped BCE computed from logits: softplus(z) - y*z per pixel."""
    z = clip(logits, -_LOGIT_CLAMP, _LOGIT_CLAMP)
    return tsum(softplus(z) - mul(targets, z))


def vae_loss(
    batch: np.ndarray, params: dict[str, Tensor], beta: float, rng: np.random.Generator
) -> Tensor:
    """Reconstruction BCE plus beta-weighted KL, summed over the batch."""
    xb = _as_batch(batch)
    if xb.shape[0] == 0:
        raise ContractError("vae_loss needs a nonempty batch")
    x = Tensor(xb[:, None])
    mu, logsig = _encode_graph(x, params)
    eps = Tensor(rng.standard_normal(mu.shape).astype(np.float32))
    z = mu + mul(exp(logsig), eps)
    logits = _decode_logits_graph(z, params)
    loss = bce_logits(logits, Tensor(xb[:, None])) + mul(kl_standard_normal(mu, logsig), beta)
    loss.name = "vae_loss"
    return loss


def train_vae(
    dataset: np.ndarray, cfg: VaeConfig, seed: int
) -> tuple[dict[str, Tensor], list[float]]:
    """Train on a (N, H, W) stack of binary BEVs; returns params and the
    per-epoch mean loss curve."""
    data = _as_batch(dataset, cfg.image_size)
    n = data.shape[0]
    if n == 0:
        raise ContractError("train_vae needs a nonempty dataset")
    params = init_vae_params(cfg, seed)
    rng = np.random.default_rng(seed + 1)
    opt = OptimState(lr=cfg.lr)
    curve = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            loss = vae_loss(data[idx], params, cfg.beta, rng)
            grads = compute_gradients(loss, params)
            adam_step(params, grads, opt)
            total += loss.item()
        curve.append(total / n)
    return params, curve
