"""Planar geometry: grid obstacles, interior predicates, occlusion of moving points.

Obstacle boundaries are traversable; only polygon interiors block.  Orientation
signs are exact (filtered floating point with a rational fallback); the single
length tolerance ``EPS_GEO`` is used where a decision cannot be made exactly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels

EPS_GEO = 1e-9
#: Occlusion-induced visible-interval endpoints are pulled inward by this many
#: seconds so sight lines chosen at an endpoint never graze a vertex.
VIS_MARGIN = 1e-9


class Point(NamedTuple):
    x: float
    y: float


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= t <= self.hi + tol


class IntervalSet:
    """Sorted, pairwise-disjoint closed intervals.

    Intervals closer than ``merge_tol`` are merged on construction.
    """

    __slots__ = ("_items",)

    def __init__(self, intervals: Iterable[Sequence[float]] = (), merge_tol: float = 0.0):
        items = sorted((float(a), float(b)) for a, b in intervals)
        merged: list[Interval] = []
        for lo, hi in items:
            if lo > hi:
                raise ValueError(f"interval with lo > hi: [{lo}, {hi}]")
            if merged and lo <= merged[-1].hi + merge_tol:
                if hi > merged[-1].hi:
                    merged[-1] = Interval(merged[-1].lo, hi)
            else:
                merged.append(Interval(lo, hi))
        self._items = tuple(merged)

    def __iter__(self):
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __eq__(self, other) -> bool:
        if isinstance(other, IntervalSet):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return hash(self._items)

    def __repr__(self) -> str:
        body = ", ".join(f"[{a:g}, {b:g}]" for a, b in self._items)
        return f"IntervalSet({body})"

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._items

    def total_length(self) -> float:
        return sum(i.hi - i.lo for i in self._items)

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return any(i.contains(t, tol) for i in self._items)

    def union(self, other: "IntervalSet", merge_tol: float = 0.0) -> "IntervalSet":
        return IntervalSet(list(self._items) + list(other._items), merge_tol)

    def negated(self) -> "IntervalSet":
        """Image under t -> -t (used for time reversal)."""
        return IntervalSet((-b, -a) for a, b in self._items)


class Motion(NamedTuple):
    """Linear motion p0 + vel (t - t0) restricted to [t0, tf]."""

    p0: Point
    vel: tuple[float, float]
    t0: float
    tf: float

    def at(self, t: float) -> Point:
        return Point(self.p0[0] + self.vel[0] * (t - self.t0),
                     self.p0[1] + self.vel[1] * (t - self.t0))


@dataclass(frozen=True)
class Polygon:
    """Outer loop counterclockwise, holes clockwise (obstacle interior on the left)."""

    outer: tuple[Point, ...]
    holes: tuple[tuple[Point, ...], ...] = ()

    def loops(self):
        yield self.outer
        yield from self.holes

    @property
    def area(self) -> float:
        return sum(signed_area(loop) for loop in self.loops())


def signed_area(loop: Sequence[Sequence[float]]) -> float:
    s = 0.0
    n = len(loop)
    for i in range(n):
        x1, y1 = loop[i]
        x2, y2 = loop[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def _simplify(loop: list[tuple]) -> list[tuple]:
    # drop repeated and collinear vertices
    out = []
    for p in loop:
        if not out or out[-1] != p:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) > 3:
        changed = False
        n = len(out)
        for i in range(n):
            a, b, c = out[i - 1], out[i], out[(i + 1) % n]
            if kernels.orient(a[0], a[1], b[0], b[1], c[0], c[1]) == 0:
                # keep pinch points where the loop doubles back on itself
                if (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) > 0:
                    del out[i]
                    changed = True
                    break
    return out


@dataclass(frozen=True, eq=False)
class ObstacleSet:
    polygons: tuple[Polygon, ...]
    convex_vertices: tuple[Point, ...]
    edges: np.ndarray = field(repr=False)
    _kernel_edges: object = field(default=None, repr=False, compare=False)

    @classmethod
    def empty(cls) -> "ObstacleSet":
        return cls.from_polygons([])

    @classmethod
    def from_polygons(cls, polygons: Iterable) -> "ObstacleSet":
        """Build from ``Polygon`` objects or plain vertex lists (any orientation)."""
        polys = []
        for poly in polygons:
            if isinstance(poly, Polygon):
                outer = [tuple(map(float, p)) for p in poly.outer]
                holes = [[tuple(map(float, p)) for p in h] for h in poly.holes]
            else:
                outer = [tuple(map(float, p)) for p in poly]
                holes = []
            outer = _simplify(outer)
            if signed_area(outer) < 0:
                outer.reverse()
            fixed_holes = []
            for h in holes:
                h = _simplify(h)
                if signed_area(h) > 0:
                    h.reverse()
                fixed_holes.append(tuple(Point(*p) for p in h))
            polys.append(Polygon(tuple(Point(*p) for p in outer), tuple(fixed_holes)))
        return cls._assemble(polys)

    @classmethod
    def _assemble(cls, polys: list[Polygon]) -> "ObstacleSet":
        rows = []
        convex: list[Point] = []
        seen = set()
        for poly in polys:
            for loop in poly.loops():
                n = len(loop)
                for i in range(n):
                    a, b, c = loop[i - 1], loop[i], loop[(i + 1) % n]
                    rows.append((b[0], b[1], c[0], c[1]))
                    if kernels.orient(a[0], a[1], b[0], b[1], c[0], c[1]) > 0 and b not in seen:
                        seen.add(b)
                        convex.append(b)
        edges = np.array(rows, dtype=np.float64).reshape(-1, 4)
        edges = np.ascontiguousarray(edges)
        obs = cls(tuple(polys), tuple(convex), edges)
        object.__setattr__(obs, "_kernel_edges", kernels.prepare_edges(edges))
        return obs

    @property
    def kernel_edges(self):
        return self._kernel_edges

    @property
    def total_area(self) -> float:
        return sum(p.area for p in self.polygons)

    def bounds(self):
        if len(self.edges) == 0:
            return None
        return (float(self.edges[:, [0, 2]].min()), float(self.edges[:, [1, 3]].min()),
                float(self.edges[:, [0, 2]].max()), float(self.edges[:, [1, 3]].max()))


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Occupancy grid; cell (r, c) covers [c s, (c+1) s] x [r s, (r+1) s]."""

    rows: int
    cols: int
    cell_size: float
    occupied: frozenset = frozenset()

    @property
    def width(self) -> float:
        return self.cols * self.cell_size

    @property
    def height(self) -> float:
        return self.rows * self.cell_size

    def is_occupied(self, r: int, c: int) -> bool:
        return (r, c) in self.occupied

    def obstacles(self) -> ObstacleSet:
        return load_occupancy_grid(self.rows, self.cols, self.cell_size, self.occupied)

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols} {self.cell_size!r}"]
        for r in reversed(range(self.rows)):
            lines.append("".join("#" if (r, c) in self.occupied else "." for c in range(self.cols)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Grid":
        """Parse ``rows cols cell_size`` then ``rows`` lines of ``#``/``.``.

        The first map line is the top row (highest y).
        """
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise GridError("empty grid text")
        head = lines[0].split()
        if len(head) != 3:
            raise GridError("header must be 'rows cols cell_size'")
        rows, cols, size = int(head[0]), int(head[1]), float(head[2])
        body = lines[1:]
        if len(body) != rows:
            raise GridError(f"expected {rows} map lines, got {len(body)}")
        occ = set()
        for i, line in enumerate(body):
            if len(line) != cols:
                raise GridError(f"map line {i + 1} has {len(line)} chars, expected {cols}")
            r = rows - 1 - i
            for c, ch in enumerate(line):
                if ch == "#":
                    occ.add((r, c))
                elif ch != ".":
                    raise GridError(f"bad map character {ch!r}")
        return cls(rows, cols, size, frozenset(occ))


def _components(cells: set) -> list[list[tuple[int, int]]]:
    comps = []
    todo = set(cells)
    for start in sorted(cells):
        if start not in todo:
            continue
        todo.discard(start)
        comp = [start]
        queue = deque([start])
        while queue:
            r, c = queue.popleft()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in todo:
                    todo.discard(nb)
                    comp.append(nb)
                    queue.append(nb)
        comps.append(sorted(comp))
    return comps


def _trace_loops(comp: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    cells = set(comp)
    out_edges: dict[tuple, list[tuple]] = {}

    def add(a, b):
        out_edges.setdefault(a, []).append(b)

    # lattice coordinates (x = col, y = row); interior kept on the left
    for r, c in comp:
        if (r - 1, c) not in cells:
            add((c, r), (c + 1, r))
        if (r, c + 1) not in cells:
            add((c + 1, r), (c + 1, r + 1))
        if (r + 1, c) not in cells:
            add((c + 1, r + 1), (c, r + 1))
        if (r, c - 1) not in cells:
            add((c, r + 1), (c, r))
    used = set()
    loops = []
    for a in sorted(out_edges):
        for b in sorted(out_edges[a]):
            if (a, b) in used:
                continue
            used.add((a, b))
            loop = [a]
            prev, cur = a, b
            while cur != a:
                loop.append(cur)
                cands = [n for n in out_edges[cur] if (cur, n) not in used]
                if len(cands) > 1:
                    # pinch vertex: turn left so diagonal neighbours stay separate
                    dx, dy = cur[0] - prev[0], cur[1] - prev[1]
                    cands.sort(key=lambda n: -(dx * (n[1] - cur[1]) - dy * (n[0] - cur[0])))
                nxt = cands[0]
                used.add((cur, nxt))
                prev, cur = cur, nxt
            loops.append(loop)
    return loops


def load_occupancy_grid(rows: int, cols: int, cell_size: float, occupied) -> ObstacleSet:
    """Merge occupied cells into rectilinear polygons (4-connectivity, holes kept)."""
    if rows <= 0 or cols <= 0 or not cell_size > 0:
        raise GridError("grid dimensions and cell size must be positive")
    cells = set()
    for rc in occupied:
        r, c = int(rc[0]), int(rc[1])
        if not (0 <= r < rows and 0 <= c < cols):
            raise GridError(f"occupied cell {(r, c)} outside {rows}x{cols} grid")
        cells.add((r, c))
    polys = []
    s = float(cell_size)
    for comp in _components(cells):
        outers, holes = [], []
        for loop in _trace_loops(comp):
            pts = _simplify([(x * s, y * s) for x, y in loop])
            if signed_area(pts) > 0:
                outers.append(tuple(Point(*p) for p in pts))
            else:
                holes.append(tuple(Point(*p) for p in pts))
        polys.append(Polygon(outers[0], tuple(holes)))
        polys.extend(Polygon(o) for o in outers[1:])
    return ObstacleSet._assemble(polys)


def _edges_of(poly: Polygon):
    for loop in poly.loops():
        for i in range(len(loop)):
            yield loop[i - 1], loop[i]


def _shared_edge_same_side(a: Polygon, b: Polygon) -> bool:
    # collinear edges running the same way have both interiors on one side
    for c, e in _edges_of(a):
        dx, dy = e[0] - c[0], e[1] - c[1]
        den = dx * dx + dy * dy
        for f, g in _edges_of(b):
            if (kernels.orient(c[0], c[1], e[0], e[1], f[0], f[1]) != 0
                    or kernels.orient(c[0], c[1], e[0], e[1], g[0], g[1]) != 0):
                continue
            if dx * (g[0] - f[0]) + dy * (g[1] - f[1]) <= 0:
                continue
            u = ((f[0] - c[0]) * dx + (f[1] - c[1]) * dy) / den
            w = ((g[0] - c[0]) * dx + (g[1] - c[1]) * dy) / den
            if min(w, 1.0) > max(u, 0.0):
                return True
    return False


def _interiors_overlap(a: Polygon, b: Polygon) -> bool:
    ea = ObstacleSet._assemble([a]).kernel_edges
    eb = ObstacleSet._assemble([b]).kernel_edges
    for poly, other in ((a, eb), (b, ea)):
        for c, e in _edges_of(poly):
            if not kernels.segment_is_free(c[0], c[1], e[0], e[1], other, 0.0):
                return True
    return _shared_edge_same_side(a, b)


def overlapping_polygons(obs: ObstacleSet) -> tuple[int, int] | None:
    """First pair of polygons whose interiors intersect, or None.

    Interior tests are per polygon, so touching polygons are fine but
    overlapping ones would cancel under the edge-parity rule.
    """
    boxes = []
    for poly in obs.polygons:
        xs = [p[0] for p in poly.outer]
        ys = [p[1] for p in poly.outer]
        boxes.append((min(xs), min(ys), max(xs), max(ys)))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            bi, bj = boxes[i], boxes[j]
            if bi[2] <= bj[0] or bj[2] <= bi[0] or bi[3] <= bj[1] or bj[3] <= bi[1]:
                continue
            if _interiors_overlap(obs.polygons[i], obs.polygons[j]):
                return i, j
    return None


def point_in_interior(p: Sequence[float], obs: ObstacleSet) -> bool:
    return kernels.point_in_interior(float(p[0]), float(p[1]), obs.kernel_edges, 0.0)


def segment_is_free(a: Sequence[float], b: Sequence[float], obs: ObstacleSet) -> bool:
    return kernels.segment_is_free(float(a[0]), float(a[1]), float(b[0]), float(b[1]),
                                   obs.kernel_edges, EPS_GEO)


def visible_sub_intervals(q: Sequence[float], motion: Motion, obs: ObstacleSet,
                          margin: float = 0.0) -> IntervalSet:
    """Maximal subintervals of the motion's window during which q sees the point."""
    (px, py), (vx, vy), t0, tf = motion
    raw = kernels.visible_intervals(float(q[0]), float(q[1]), float(px), float(py),
                                    float(vx), float(vy), float(t0), float(tf),
                                    obs.kernel_edges, margin)
    return IntervalSet(raw)


def distance_point_segment(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    den = dx * dx + dy * dy
    u = 0.0 if den == 0.0 else ((p[0] - ax) * dx + (p[1] - ay) * dy) / den
    u = min(1.0, max(0.0, u))
    return math.hypot(ax + u * dx - p[0], ay + u * dy - p[1])
