"""Egocentric BEV masks and style-randomized first-person ground-plane views.

The BEV is an exact binary road-occupancy raster, heading-up and centered on
the robot. The FPV is a single pinhole camera: rays below a fixed horizon row
intersect the ground plane, the hit points sample the same road geometry as
the BEV, and a palette / texture / lighting / noise style deterministically
colors the result. Holdout style families shift palettes and perturb the
camera to stand in for a real-world deployment gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from ..errors import ContractError
from .geometry import TileMap

BEV_SIZE_DEFAULT = 64
BEV_RANGE_DEFAULT = 20.0
FPV_SIZE_DEFAULT = 64
FOV_DEG_DEFAULT = 90.0
CAM_HEIGHT_DEFAULT = 1.2
CAM_PITCH_DEFAULT = 0.18
MAX_DEPTH = 40.0

# palette = (road, ground, sky_top, sky_bottom) as RGB rows.
_TRAIN_PALETTES = (
    ((90, 90, 95), (70, 120, 60), (70, 120, 220), (160, 200, 240)),
    ((105, 100, 100), (95, 130, 70), (90, 140, 225), (180, 210, 235)),
    ((80, 82, 88), (110, 120, 80), (60, 110, 200), (150, 190, 230)),
    ((98, 95, 92), (80, 105, 55), (85, 130, 215), (170, 205, 240)),
    ((112, 110, 112), (120, 140, 95), (100, 150, 230), (190, 215, 245)),
    ((86, 88, 85), (60, 100, 50), (75, 125, 210), (165, 195, 235)),
)
_HOLDOUT_PALETTES = (
    ((52, 50, 58), (150, 120, 90), (235, 150, 90), (250, 205, 150)),
    ((140, 135, 128), (190, 190, 200), (175, 185, 205), (230, 235, 245)),
    ((70, 62, 58), (125, 95, 70), (120, 90, 140), (200, 160, 190)),
    ((118, 112, 98), (165, 150, 100), (210, 200, 120), (245, 235, 180)),
)


@dataclass(frozen=True)
class RenderStyle:
    """Rendering appearance; `family` separates train from holdout looks."""

    palette_id: int
    texture_id: int
    lighting_gain: float
    hue_shift: float
    noise_level: float
    family: str = "train"
    cam_height: float = CAM_HEIGHT_DEFAULT
    cam_pitch: float = CAM_PITCH_DEFAULT

    def __post_init__(self):
        if self.family not in ("train", "holdout"):
            raise ContractError(f"unknown style family '{self.family}'")

    def palette(self) -> np.ndarray:
        pool = _TRAIN_PALETTES if self.family == "train" else _HOLDOUT_PALETTES
        return np.asarray(pool[self.palette_id % len(pool)], dtype=np.float32)


def make_styles(family: str, count: int, seed: int) -> list[RenderStyle]:
    """Deterministic style set for one family.

    Holdout styles additionally perturb camera height and pitch, widening the
    train/deploy gap beyond appearance alone.
    """
    rng = np.random.default_rng(seed + (0 if family == "train" else 7_777_777))
    styles = []
    for k in range(count):
        cam_h, cam_p = CAM_HEIGHT_DEFAULT, CAM_PITCH_DEFAULT
        if family == "holdout":
            cam_h += float(rng.uniform(-0.25, 0.25))
            cam_p += float(rng.uniform(-0.05, 0.05))
        styles.append(
            RenderStyle(
                palette_id=k,
                texture_id=int(rng.integers(0, 4)),
                lighting_gain=float(rng.uniform(0.8, 1.2)),
                hue_shift=float(rng.uniform(-0.25, 0.25)),
                noise_level=float(rng.uniform(0.05, 0.35)),
                family=family,
                cam_height=cam_h,
                cam_pitch=cam_p,
            )
        )
    return styles


def _collect_rects(tmap: TileMap, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Road rectangles of every cell touched by the sample points' bbox."""
    ts = tmap.tile_size
    i0 = int(math.floor(float(xs.min()) / ts))
    i1 = int(math.floor(float(xs.max()) / ts))
    j0 = int(math.floor(float(ys.min()) / ts))
    j1 = int(math.floor(float(ys.max()) / ts))
    rects = []
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            rects.extend(tmap.cell_rects(i, j))
    if not rects:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray(rects, dtype=np.float64)


def _road_mask(tmap: TileMap, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    rects = _collect_rects(tmap, xs, ys)
    px = xs.reshape(-1)
    py = ys.reshape(-1)
    mask = np.zeros(px.shape, dtype=bool)
    if len(rects):
        x0, x1 = float(px.min()), float(px.max())
        y0, y1 = float(py.min()), float(py.max())
        for cx, cy, hx, hy in rects:
            if cx + hx < x0 or cx - hx > x1 or cy + hy < y0 or cy - hy > y1:
                continue
            np.logical_or(
                mask,
                (np.abs(px - cx) <= hx) & (np.abs(py - cy) <= hy),
                out=mask,
            )
    return mask.reshape(xs.shape)


def render_bev(
    tmap: TileMap,
    pose,
    range_m: float = BEV_RANGE_DEFAULT,
    size: int = BEV_SIZE_DEFAULT,
) -> np.ndarray:
    """Binary road mask (1 = road), robot-centered, heading pointing up."""
    res = range_m / size
    half = size / 2.0
    fwd = (np.arange(size, dtype=np.float64)[::-1] + 0.5 - half) * res
    right = (np.arange(size, dtype=np.float64) + 0.5 - half) * res
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    # forward = (c, s); right of heading = (s, -c)
    xs = pose.x + fwd[:, None] * c + right[None, :] * s
    ys = pose.y + fwd[:, None] * s - right[None, :] * c
    return _road_mask(tmap, xs, ys).astype(np.uint8)


def _hash_noise(ix: np.ndarray, iy: np.ndarray, salt: int) -> np.ndarray:
    """Deterministic value noise in [-1, 1] from integer lattice coordinates."""
    h = (ix.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)) ^ (
        iy.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
    ) ^ np.uint64(salt * 0x165667B19E3779F9 & 0xFFFFFFFFFFFFFFFF)
    h ^= h >> np.uint64(33)
    h *= np.uint64(0xFF51AFD7ED558CCD)
    h ^= h >> np.uint64(33)
    return (h / np.float64(2**64 - 1)).astype(np.float32) * 2.0 - 1.0


def render_fpv(
    tmap: TileMap,
    pose,
    style: RenderStyle,
    seed: int,
    size: int = FPV_SIZE_DEFAULT,
    fov_deg: float = FOV_DEG_DEFAULT,
) -> np.ndarray:
    """Projective ground-plane render at the robot pose, (H, W, 3) uint8.

    Identical (pose, style, seed) always reproduce the same image; the seed
    drives only per-pixel sensor noise.
    """
    tan_f = math.tan(math.radians(fov_deg) / 2.0)
    cols = (2.0 * (np.arange(size, dtype=np.float64) + 0.5) / size - 1.0) * tan_f
    rows = (1.0 - 2.0 * (np.arange(size, dtype=np.float64) + 0.5) / size) * tan_f
    a = np.broadcast_to(cols[None, :], (size, size))
    b = np.broadcast_to(rows[:, None], (size, size))
    phi = style.cam_pitch
    sin_p, cos_p = math.sin(phi), math.cos(phi)
    dz = -sin_p + b * cos_p
    ground = dz < -1e-9

    pal = style.palette()
    img = np.zeros((size, size, 3), dtype=np.float32)

    # Sky gradient above the horizon row.
    sky = ~ground
    span = tan_f - math.tan(phi) if tan_f > math.tan(phi) else 1.0
    t_sky = np.clip((b - math.tan(phi)) / span, 0.0, 1.0)[sky]
    img[sky] = pal[3][None, :] + t_sky[:, None] * (pal[2] - pal[3])[None, :]

    # Ground-plane intersection in the robot frame (x forward, y left).
    t = np.full_like(dz, MAX_DEPTH)
    np.divide(style.cam_height, -dz, out=t, where=ground)
    np.minimum(t, MAX_DEPTH, out=t)
    gx = t * (cos_p + b * sin_p)
    gy = -t * a
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    wx = pose.x + gx * c - gy * s
    wy = pose.y + gx * s + gy * c

    road = _road_mask(tmap, wx[ground], wy[ground])
    base = np.where(road[:, None], pal[0][None, :], pal[1][None, :])

    # World-anchored value noise so textures stay put as the camera moves.
    freq = (1.5, 2.5, 4.0, 6.0)[style.texture_id % 4]
    tex = _hash_noise(
        np.floor(wx[ground] * freq).astype(np.int64),
        np.floor(wy[ground] * freq).astype(np.int64),
        style.texture_id + 1,
    )
    depth_fade = np.clip(t[ground] / MAX_DEPTH, 0.0, 1.0).astype(np.float32)
    shade = 1.0 + tex * np.where(road, 0.05, 0.14).astype(np.float32)
    ground_rgb = base * shade[:, None]
    # Distant ground fades toward the horizon color.
    ground_rgb = ground_rgb + (pal[3][None, :] - ground_rgb) * (depth_fade[:, None] ** 2) * 0.6
    img[ground] = ground_rgb

    img *= np.float32(style.lighting_gain)
    hs = style.hue_shift
    if abs(hs) > 1e-9:
        rolled = np.roll(img, 1 if hs > 0 else -1, axis=2)
        img = img * (1.0 - abs(hs)) + rolled * abs(hs)
    if style.noise_level > 0:
        rng = np.random.default_rng(seed)
        img = img + rng.normal(0.0, 12.0 * style.noise_level, img.shape).astype(np.float32)
    return np.clip(img, 0.0, 255.0).astype(np.uint8)
