"""Trajectory collection and on-disk dataset serialization.

Datasets are directories of netpbm images (PGM for BEV masks, PPM for FPV
frames) plus one JSON manifest carrying poses, actions, labels, style
provenance, and a CRC-32 per image file. write -> read is an exact identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import json
import math
import zlib
from pathlib import Path

import numpy as np

from ..errors import ContractError, FormatError, IntegrityError
from .dynamics import Action, RobotPose, step_dynamics
from .geometry import CLASSES, EMPTY, TileMap, local_class
from .render import BEV_RANGE_DEFAULT, RenderStyle, render_bev, render_fpv

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = "1"


@dataclass
class TrajectoryRecord:
    fpv: np.ndarray          # (H, W, 3) uint8
    bev: np.ndarray          # (H, W) uint8 in {0, 1}
    action: Action
    pose: RobotPose
    label: str
    t: int


@dataclass
class Trajectory:
    records: list[TrajectoryRecord]
    style: RenderStyle

    def __post_init__(self):
        ts = [r.t for r in self.records]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ContractError("trajectory timesteps must be strictly increasing")

    def __len__(self):
        return len(self.records)


def sample_road_pose(tmap: TileMap, rng: np.random.Generator) -> RobotPose:
    """Pose jittered around a random road tile center, headed along a road."""
    cells = tmap.road_cells()
    if not cells:
        raise ContractError("map has no road tiles")
    i, j = cells[int(rng.integers(len(cells)))]
    edges = sorted(tmap.edges_at(i, j))
    d = edges[int(rng.integers(len(edges)))]
    base_heading = (math.pi / 2.0, 0.0, -math.pi / 2.0, math.pi)[d]
    cx, cy = tmap.cell_center(i, j)
    x = cx + float(rng.uniform(-0.5, 0.5))
    y = cy + float(rng.uniform(-0.5, 0.5))
    heading = base_heading + float(rng.uniform(-math.radians(15), math.radians(15)))
    return RobotPose(x, y, heading)


def _label_for(tmap: TileMap, pose: RobotPose) -> str:
    """Class label tolerant of slightly off-road poses (nearest road tile)."""
    try:
        return local_class(tmap, pose)
    except ContractError:
        i0, j0 = tmap.cell_of(pose.x, pose.y)
        best, best_d = None, math.inf
        for i in range(i0 - 1, i0 + 2):
            for j in range(j0 - 1, j0 + 2):
                if tmap.kind_at(i, j) == EMPTY:
                    continue
                cx, cy = tmap.cell_center(i, j)
                d = (pose.x - cx) ** 2 + (pose.y - cy) ** 2
                if d < best_d:
                    best, best_d = (i, j), d
        if best is None:
            raise
        cx, cy = tmap.cell_center(*best)
        return local_class(tmap, RobotPose(cx, cy, pose.heading))


class CruiseController:
    """Scripted driver: aims at the exit-edge midpoint of the current tile.

    Good enough to keep dataset trajectories on the road through arbitrary
    maps; not a policy.
    """

    def __init__(self, throttle: float = 0.6, gain: float = 1.8):
        self.throttle = throttle
        self.gain = gain

    def __call__(self, tmap: TileMap, pose: RobotPose, t: int, rng: np.random.Generator) -> Action:
        i, j = tmap.cell_of(pose.x, pose.y)
        edges = sorted(tmap.edges_at(i, j))
        if not edges:
            return Action(0.0, 0.0)
        hx, hy = math.cos(pose.heading), math.sin(pose.heading)
        from .geometry import DIR_VECS

        d = max(edges, key=lambda e: (DIR_VECS[e][0] * hx + DIR_VECS[e][1] * hy, -e))
        cx, cy = tmap.cell_center(i, j)
        half = tmap.tile_size / 2.0
        tx = cx + DIR_VECS[d][0] * half
        ty = cy + DIR_VECS[d][1] * half
        err = math.remainder(math.atan2(ty - pose.y, tx - pose.x) - pose.heading, math.tau)
        return Action(self.throttle, max(-1.0, min(1.0, self.gain * err)))


def collect_trajectory(
    tmap: TileMap,
    controller,
    steps: int,
    style: RenderStyle,
    rng: np.random.Generator,
    dt: float = 0.1,
    bev_range: float = BEV_RANGE_DEFAULT,
    bev_size: int = 64,
    fpv_size: int = 64,
    start_pose: RobotPose | None = None,
) -> Trajectory:
    """Roll `controller` for `steps` and record paired FPV/BEV observations."""
    if steps < 1:
        raise ContractError("trajectory needs at least one step")
    pose = start_pose if start_pose is not None else sample_road_pose(tmap, rng)
    records = []
    for t in range(steps):
        fpv_seed = int(rng.integers(0, 2**63 - 1))
        fpv = render_fpv(tmap, pose, style, fpv_seed, size=fpv_size)
        bev = render_bev(tmap, pose, range_m=bev_range, size=bev_size)
        action = controller(tmap, pose, t, rng)
        records.append(TrajectoryRecord(fpv, bev, action, pose, _label_for(tmap, pose), t))
        pose = step_dynamics(pose, action, dt=dt)
    return Trajectory(records, style)


# -- netpbm image files ------------------------------------------------------------


def write_pgm(path: Path, mask: np.ndarray) -> None:
    """Binary PGM, 255 = road."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ContractError(f"PGM wants a 2-D mask, got {mask.shape}")
    h, w = mask.shape
    payload = (mask.astype(np.uint8) * 255).tobytes()
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + payload)


def write_ppm(path: Path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ContractError(f"PPM wants (H, W, 3), got {rgb.shape}")
    h, w, _ = rgb.shape
    path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes())


def _read_netpbm(path: Path, magic: bytes, channels: int) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise IntegrityError(f"missing image file: {path}") from None
    if not raw.startswith(magic):
        raise FormatError(f"{path}: expected {magic!r} header")
    parts = raw.split(b"\n", 3)
    if len(parts) < 4:
        raise FormatError(f"{path}: truncated netpbm header")
    try:
        w, h = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise FormatError(f"{path}: bad netpbm header") from exc
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    data = parts[3]
    need = w * h * channels
    if len(data) < need:
        raise IntegrityError(f"truncated image file: {path} ({len(data)} of {need} bytes)")
    arr = np.frombuffer(data[:need], dtype=np.uint8)
    return arr.reshape((h, w) if channels == 1 else (h, w, channels))


def read_pgm(path: Path) -> np.ndarray:
    return (_read_netpbm(path, b"P5", 1) > 127).astype(np.uint8)


def read_ppm(path: Path) -> np.ndarray:
    return _read_netpbm(path, b"P6", 3)


# -- dataset directories --------------------------------------------------------------


def write_dataset(
    trajectories: list[Trajectory],
    directory: str | Path,
    split: str = "train",
    tile_size_m: float = 10.0,
    bev_range_m: float = BEV_RANGE_DEFAULT,
) -> dict:
    """Serialize trajectories under `directory` and return the manifest.

    A dataset tagged "train" refuses holdout-style sequences, keeping the
    style families separated end to end.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if split == "train":
        for k, traj in enumerate(trajectories):
            if traj.style.family != "train":
                raise ContractError(
                    f"sequence {k} uses a holdout style inside a train-tagged dataset"
                )
    sequences = []
    checksums = {}
    for si, traj in enumerate(trajectories):
        seq_dir = directory / f"seq_{si:04d}"
        seq_dir.mkdir(exist_ok=True)
        recs = []
        for r in traj.records:
            fpv_rel = f"seq_{si:04d}/frame_{r.t:06d}_fpv.ppm"
            bev_rel = f"seq_{si:04d}/frame_{r.t:06d}_bev.pgm"
            write_ppm(directory / fpv_rel, r.fpv)
            write_pgm(directory / bev_rel, r.bev)
            checksums[fpv_rel] = zlib.crc32((directory / fpv_rel).read_bytes())
            checksums[bev_rel] = zlib.crc32((directory / bev_rel).read_bytes())
            recs.append(
                {
                    "fpv_path": fpv_rel,
                    "bev_path": bev_rel,
                    "throttle": r.action.throttle,
                    "steer": r.action.steer,
                    "x": r.pose.x,
                    "y": r.pose.y,
                    "heading": r.pose.heading,
                    "class": r.label,
                    "t": r.t,
                }
            )
        sequences.append(
            {
                "style_family": traj.style.family,
                "style": {
                    "palette_id": traj.style.palette_id,
                    "texture_id": traj.style.texture_id,
                    "lighting_gain": traj.style.lighting_gain,
                    "hue_shift": traj.style.hue_shift,
                    "noise_level": traj.style.noise_level,
                    "cam_height": traj.style.cam_height,
                    "cam_pitch": traj.style.cam_pitch,
                },
                "records": recs,
            }
        )
    manifest = {
        "format_version": FORMAT_VERSION,
        "split": split,
        "tile_size_m": tile_size_m,
        "bev_range_m": bev_range_m,
        "classes": list(CLASSES),
        "sequences": sequences,
        "checksums": checksums,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1))
    return manifest


def read_manifest(directory: str | Path) -> dict:
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.exists():
        raise FormatError(f"no manifest in {directory}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed manifest {path}: {exc}") from exc
    for key in ("format_version", "split", "tile_size_m", "bev_range_m", "classes", "sequences", "checksums"):
        if key not in manifest:
            raise FormatError(f"malformed manifest {path}: missing key '{key}'")
    if manifest["format_version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported dataset format version {manifest['format_version']!r}")
    return manifest


def read_dataset(directory: str | Path) -> list[Trajectory]:
    """Load a dataset directory back into trajectories, verifying checksums."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    checksums = manifest["checksums"]
    out = []
    for seq in manifest["sequences"]:
        st = seq["style"]
        style = RenderStyle(
            palette_id=st["palette_id"],
            texture_id=st["texture_id"],
            lighting_gain=st["lighting_gain"],
            hue_shift=st["hue_shift"],
            noise_level=st["noise_level"],
            family=seq["style_family"],
            cam_height=st["cam_height"],
            cam_pitch=st["cam_pitch"],
        )
        records = []
        for r in seq["records"]:
            for rel in (r["fpv_path"], r["bev_path"]):
                p = directory / rel
                if not p.exists():
                    raise IntegrityError(f"missing image file: {p}")
                crc = zlib.crc32(p.read_bytes())
                if crc != checksums.get(rel):
                    raise IntegrityError(
                        f"checksum mismatch for {rel}: {crc} != {checksums.get(rel)}"
                    )
            records.append(
                TrajectoryRecord(
                    fpv=read_ppm(directory / r["fpv_path"]),
                    bev=read_pgm(directory / r["bev_path"]),
                    action=Action(r["throttle"], r["steer"]),
                    pose=RobotPose(r["x"], r["y"], r["heading"]),
                    label=r["class"],
                    t=r["t"],
                )
            )
        out.append(Trajectory(records, style))
    return out
