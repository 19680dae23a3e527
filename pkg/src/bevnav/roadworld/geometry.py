"""Procedural tile-based road maps: layout, road geometry, classes, waypoints.

A map is a grid of tiles; each tile connects a subset of its four edges with
road strips of fixed width running edge-to-center. Because every strip lives
inside its own tile and both sides of a shared edge carry the same road
width, road continuity across tile borders holds by construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import math

import numpy as np

from ..errors import ContractError, NoRouteError

# Tile kinds.
EMPTY, STRAIGHT, CURVE, TEE, CROSS, DEAD_END = range(6)
KIND_NAMES = ("empty", "straight", "curve", "t-junction", "crossroad", "dead-end")

# Edge directions, clockwise from north; unit vectors in (x east, y north).
N, E, S, W = range(4)
DIR_VECS = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))
DIR_STEPS = ((0, 1), (1, 0), (0, -1), (-1, 0))

# Base edge sets at orientation 0; orientation k rotates clockwise by k * 90°.
_BASE_EDGES = {
    EMPTY: frozenset(),
    STRAIGHT: frozenset({N, S}),
    CURVE: frozenset({N, E}),
    TEE: frozenset({N, E, W}),
    CROSS: frozenset({N, E, S, W}),
    DEAD_END: frozenset({N}),
}

# Local road-geometry classes, as written into dataset labels.
CLASSES = ("straight", "left-curve", "right-curve", "t-junction", "crossroad", "dead-end")


def rotate_dir(d: int, quarter_turns: int) -> int:
    return (d + quarter_turns) % 4


def tile_edges(kind: int, orientation: int) -> frozenset[int]:
    """Connected edges of a tile, after clockwise rotation."""
    return frozenset(rotate_dir(d, orientation) for d in _BASE_EDGES[kind])


def kind_from_edges(edges: frozenset[int]) -> tuple[int, int]:
    """Recover (kind, orientation) from a connected-edge set."""
    deg = len(edges)
    if deg == 0:
        return EMPTY, 0
    if deg == 1:
        return DEAD_END, next(iter(edges))
    if deg == 4:
        return CROSS, 0
    if deg == 3:
        missing = next(iter({N, E, S, W} - edges))
        return TEE, (missing - 2) % 4
    a, b = sorted(edges)
    if (a, b) in ((N, S), (E, W)):
        return STRAIGHT, 0 if a == N else 1
    # Adjacent pair: orientation o maps base {N, E} onto {o, o+1}.
    if (b - a) % 4 == 1:
        return CURVE, a
    return CURVE, b  # pair is {W, N} = {3, 0}


@dataclass
class TileMap:
    """Grid of road tiles with shared-width strips.

    `kinds` and `orientations` are (width, height) int arrays indexed
    [ix, iy] with iy increasing north. `periodic` tiles the map infinitely
    in both directions so local geometry repeats exactly.
    """

    width: int
    height: int
    kinds: np.ndarray
    orientations: np.ndarray
    tile_size: float = 10.0
    road_half_width: float = 2.0
    periodic: bool = False
    _rect_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.kinds = np.asarray(self.kinds, dtype=np.int8)
        self.orientations = np.asarray(self.orientations, dtype=np.int8)
        if self.kinds.shape != (self.width, self.height):
            raise ContractError(
                f"kinds shape {self.kinds.shape} != ({self.width}, {self.height})"
            )
        if not 0 < self.road_half_width < self.tile_size / 2:
            raise ContractError("road_half_width must be in (0, tile_size/2)")
        self._check_continuity()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edge_sets(cls, width, height, edges: dict[tuple[int, int], frozenset[int]], **kw):
        kinds = np.zeros((width, height), dtype=np.int8)
        orients = np.zeros((width, height), dtype=np.int8)
        for (i, j), es in edges.items():
            kinds[i, j], orients[i, j] = kind_from_edges(frozenset(es))
        return cls(width, height, kinds, orients, **kw)

    @classmethod
    def generate(
        cls,
        width: int,
        height: int,
        seed: int,
        fill: float = 0.75,
        loop_fraction: float = 0.5,
        **kw,
    ) -> "TileMap":
        """Random connected road network: grown region, spanning tree, loops."""
        if width * height < 2:
            raise ContractError("map must have at least 2 cells")
        rng = np.random.default_rng(seed)
        target = max(2, int(round(fill * width * height)))
        start = (int(rng.integers(width)), int(rng.integers(height)))
        region = {start}
        frontier = [start]
        while len(region) < target and frontier:
            cell = frontier[int(rng.integers(len(frontier)))]
            nbrs = [
                (cell[0] + dx, cell[1] + dy)
                for dx, dy in DIR_STEPS
                if 0 <= cell[0] + dx < width and 0 <= cell[1] + dy < height
            ]
            nbrs = [n for n in nbrs if n not in region]
            if not nbrs:
                frontier.remove(cell)
                continue
            new = nbrs[int(rng.integers(len(nbrs)))]
            region.add(new)
            frontier.append(new)

        # Randomized DFS spanning tree over the region.
        edges: dict[tuple[int, int], set[int]] = {c: set() for c in region}
        visited = {start}
        stack = [start]
        while stack:
            cell = stack[-1]
            cand = []
            for d, (dx, dy) in enumerate(DIR_STEPS):
                n = (cell[0] + dx, cell[1] + dy)
                if n in region and n not in visited:
                    cand.append((d, n))
            if not cand:
                stack.pop()
                continue
            d, n = cand[int(rng.integers(len(cand)))]
            edges[cell].add(d)
            edges[n].add((d + 2) % 4)
            visited.add(n)
            stack.append(n)

        # Close a fraction of the remaining region-internal edges into loops.
        for (i, j) in sorted(region):
            for d in (N, E):
                dx, dy = DIR_STEPS[d]
                n = (i + dx, j + dy)
                if n in region and d not in edges[(i, j)] and rng.random() < loop_fraction:
                    edges[(i, j)].add(d)
                    edges[n].add((d + 2) % 4)

        return cls.from_edge_sets(
            width, height, {c: frozenset(es) for c, es in edges.items()}, **kw
        )

    @classmethod
    def generate_with_all_classes(cls, width, height, seed, max_tries=64, **kw) -> "TileMap":
        """Like generate(), retrying derived seeds until all 6 classes occur."""
        for k in range(max_tries):
            m = cls.generate(width, height, seed + 1000003 * k, **kw)
            kinds = set(int(v) for v in m.kinds.reshape(-1))
            if {STRAIGHT, CURVE, TEE, CROSS, DEAD_END} <= kinds:
                return m
        raise ContractError(f"no map with all tile kinds in {max_tries} tries (seed {seed})")

    # -- queries -------------------------------------------------------------

    def _check_continuity(self):
        # Interior borders must agree edge-for-edge; openings onto the outer
        # boundary are legal (the road simply ends at the map limit).
        for i in range(self.width):
            for j in range(self.height):
                es = tile_edges(int(self.kinds[i, j]), int(self.orientations[i, j]))
                for d in (N, E):
                    dx, dy = DIR_STEPS[d]
                    ni, nj = i + dx, j + dy
                    if self.periodic:
                        ni, nj = ni % self.width, nj % self.height
                    elif not (0 <= ni < self.width and 0 <= nj < self.height):
                        continue
                    nes = tile_edges(int(self.kinds[ni, nj]), int(self.orientations[ni, nj]))
                    if (d in es) != ((d + 2) % 4 in nes):
                        raise ContractError(
                            f"road edge mismatch between tiles ({i},{j}) and ({ni},{nj})"
                        )

    def edges_at(self, i: int, j: int) -> frozenset[int]:
        if self.periodic:
            i, j = i % self.width, j % self.height
        elif not (0 <= i < self.width and 0 <= j < self.height):
            return frozenset()
        return tile_edges(int(self.kinds[i, j]), int(self.orientations[i, j]))

    def kind_at(self, i: int, j: int) -> int:
        if self.periodic:
            i, j = i % self.width, j % self.height
        elif not (0 <= i < self.width and 0 <= j < self.height):
            return EMPTY
        return int(self.kinds[i, j])

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return int(math.floor(x / self.tile_size)), int(math.floor(y / self.tile_size))

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.tile_size, (j + 0.5) * self.tile_size)

    def cell_rects(self, i: int, j: int) -> tuple:
        """Axis-aligned road rectangles (cx, cy, hx, hy) of one tile.

        Rectangle coordinates are placed at the (possibly out-of-range) cell
        position; on periodic maps the tile content wraps but its location
        does not, so translated views reproduce exactly.
        """
        key = (i, j)
        cached = self._rect_cache.get(key)
        if cached is not None:
            return cached
        edges = self.edges_at(i, j)
        ts, w = self.tile_size, self.road_half_width
        h = ts / 2.0
        cx, cy = (i + 0.5) * ts, (j + 0.5) * ts
        rects = []
        # Each strip runs from w behind the center out to the edge, so bends
        # and junctions form full-width unions.
        half_len = (h + w) / 2.0
        offset = (h - w) / 2.0
        for d in sorted(edges):
            ex, ey = DIR_VECS[d]
            rcx, rcy = cx + ex * offset, cy + ey * offset
            if d in (N, S):
                rects.append((rcx, rcy, w, half_len))
            else:
                rects.append((rcx, rcy, half_len, w))
        rects = tuple(rects)
        self._rect_cache[key] = rects
        return rects

    def on_road(self, x: float, y: float) -> bool:
        i, j = self.cell_of(x, y)
        for cx, cy, hx, hy in self.cell_rects(i, j):
            if abs(x - cx) <= hx and abs(y - cy) <= hy:
                return True
        return False

    def road_distance(self, x: float, y: float) -> float:
        """Euclidean distance to the nearest road point (0 when on road).

        Searches the 3x3 cell neighborhood, which is exact for distances up
        to one tile; beyond that the tile-size lower bound is returned.
        """
        i0, j0 = self.cell_of(x, y)
        best = math.inf
        for i in range(i0 - 1, i0 + 2):
            for j in range(j0 - 1, j0 + 2):
                for cx, cy, hx, hy in self.cell_rects(i, j):
                    dx = abs(x - cx) - hx
                    dy = abs(y - cy) - hy
                    if dx <= 0.0 and dy <= 0.0:
                        return 0.0
                    d2 = max(dx, 0.0) ** 2 + max(dy, 0.0) ** 2
                    if d2 < best:
                        best = d2
        return math.sqrt(best) if best < math.inf else self.tile_size

    def road_cells(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i in range(self.width)
            for j in range(self.height)
            if int(self.kinds[i, j]) != EMPTY
        ]


def local_class(tmap: TileMap, pose) -> str:
    """Road-geometry class at the robot's tile, seen along its heading.

    Curves resolve to left or right from the turn direction a traveler with
    this heading would take; junction and dead-end tiles classify the same
    for every approach.
    """
    if not tmap.on_road(pose.x, pose.y):
        raise ContractError(f"pose ({pose.x:.2f}, {pose.y:.2f}) is off road")
    i, j = tmap.cell_of(pose.x, pose.y)
    kind = tmap.kind_at(i, j)
    if kind == STRAIGHT:
        return "straight"
    if kind == TEE:
        return "t-junction"
    if kind == CROSS:
        return "crossroad"
    if kind == DEAD_END:
        return "dead-end"
    if kind == CURVE:
        hx, hy = math.cos(pose.heading), math.sin(pose.heading)
        dirs = sorted(tmap.edges_at(i, j))
        d_exit = max(dirs, key=lambda d: (DIR_VECS[d][0] * hx + DIR_VECS[d][1] * hy, -d))
        d_entry = dirs[0] if dirs[1] == d_exit else dirs[1]
        ix, iy = -DIR_VECS[d_entry][0], -DIR_VECS[d_entry][1]
        ox, oy = DIR_VECS[d_exit]
        return "left-curve" if ix * oy - iy * ox > 0 else "right-curve"
    raise ContractError(f"pose is on an empty tile ({i},{j})")


def _cell_path(tmap: TileMap, start_cell, goal_cell) -> list[tuple[int, int]]:
    if start_cell == goal_cell:
        return [start_cell]
    prev: dict[tuple[int, int], tuple[int, int] | None] = {start_cell: None}
    q = deque([start_cell])
    while q:
        cell = q.popleft()
        for d in sorted(tmap.edges_at(*cell)):
            dx, dy = DIR_STEPS[d]
            n = (cell[0] + dx, cell[1] + dy)
            if tmap.periodic:
                n = (n[0] % tmap.width, n[1] % tmap.height)
            elif not (0 <= n[0] < tmap.width and 0 <= n[1] < tmap.height):
                continue
            if n in prev:
                continue
            prev[n] = cell
            if n == goal_cell:
                path = [n]
                cur: tuple[int, int] | None = cell
                while cur is not None:
                    path.append(cur)
                    cur = prev[cur]
                return path[::-1]
            q.append(n)
    raise NoRouteError(f"no road route from cell {start_cell} to {goal_cell}")


def make_waypoints(
    tmap: TileMap, start: tuple[float, float], goal: tuple[float, float], resolution_m: float
) -> np.ndarray:
    """Centerline points spaced `resolution_m` along the route, goal last.

    Start and goal must lie on road; raises NoRouteError when the road graph
    does not connect them.
    """
    if resolution_m <= 0:
        raise ContractError("resolution must be positive")
    for name, (x, y) in (("start", start), ("goal", goal)):
        if not tmap.on_road(x, y):
            raise ContractError(f"{name} point ({x:.2f}, {y:.2f}) is off road")
    if start == goal:
        return np.array([goal], dtype=np.float64)
    path = _cell_path(tmap, tmap.cell_of(*start), tmap.cell_of(*goal))
    pts: list[tuple[float, float]] = [start]
    for k, cell in enumerate(path):
        pts.append(tmap.cell_center(*cell))
        if k + 1 < len(path):
            nxt = path[k + 1]
            mx = (tmap.cell_center(*cell)[0] + tmap.cell_center(*nxt)[0]) / 2.0
            my = (tmap.cell_center(*cell)[1] + tmap.cell_center(*nxt)[1]) / 2.0
            pts.append((mx, my))
    pts.append(goal)
    poly = [pts[0]]
    for p in pts[1:]:
        if math.hypot(p[0] - poly[-1][0], p[1] - poly[-1][1]) > 1e-9:
            poly.append(p)

    seg_len = [
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(poly[:-1], poly[1:])
    ]
    total = sum(seg_len)
    out = []
    target = resolution_m
    acc = 0.0
    seg = 0
    while target < total - 1e-9 and seg < len(seg_len):
        while seg < len(seg_len) and acc + seg_len[seg] < target:
            acc += seg_len[seg]
            seg += 1
        if seg >= len(seg_len):
            break
        f = (target - acc) / seg_len[seg]
        a, b = poly[seg], poly[seg + 1]
        out.append((a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])))
        target += resolution_m
    out.append(goal)
    return np.array(out, dtype=np.float64)


def straight_corridor(n_tiles: int, **kw) -> TileMap:
    """East-west corridor: straight tiles capped by dead ends at both ends."""
    if n_tiles < 2:
        raise ContractError("corridor needs at least two tiles")
    edges = {}
    for i in range(n_tiles):
        es = set()
        if i > 0:
            es.add(W)
        if i < n_tiles - 1:
            es.add(E)
        edges[(i, 0)] = frozenset(es)
    return TileMap.from_edge_sets(n_tiles, 1, edges, **kw)


def uniform_map(width: int, height: int, kind: int, orientation: int = 0, **kw) -> TileMap:
    kinds = np.full((width, height), kind, dtype=np.int8)
    orients = np.full((width, height), orientation, dtype=np.int8)
    return TileMap(width, height, kinds, orients, **kw)
