"""Static visibility graph over key positions and the visible-interval table."""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import geometry, kernels
from .geometry import VIS_MARGIN, IntervalSet, ObstacleSet, Point
from .model import INF, Instance, WindowNode, window_nodes


@dataclass(eq=False)
class VisibilityGraph:
    points: list[Point]
    obstacles: ObstacleSet
    v_max: float
    indptr: np.ndarray
    indices: np.ndarray
    lengths: np.ndarray
    ids: dict = field(default_factory=dict)
    depot_id: int = -1
    # per window-node index: node ids of the window's start and end positions
    start_ids: list = field(default_factory=list)
    end_ids: list = field(default_factory=list)

    def __post_init__(self):
        self.xs = np.array([p[0] for p in self.points], dtype=np.float64)
        self.ys = np.array([p[1] for p in self.points], dtype=np.float64)
        self.costs = self.lengths / self.v_max
        self.kernel_graph = kernels.prepare_graph(self.indptr, self.indices, self.costs)
        self._component = None

    @property
    def n(self) -> int:
        return len(self.points)

    def node_id(self, p: Sequence[float]) -> Optional[int]:
        return self.ids.get(Point(float(p[0]), float(p[1])))

    def neighbors(self, i: int) -> list[int]:
        return self.indices[self.indptr[i]:self.indptr[i + 1]].tolist()

    def has_edge(self, i: int, j: int) -> bool:
        row = self.indices[self.indptr[i]:self.indptr[i + 1]]
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def edges(self):
        for i in range(self.n):
            for j in self.neighbors(i):
                if i < j:
                    yield i, j

    def components(self) -> np.ndarray:
        """Connected-component label per node."""
        if self._component is None:
            from scipy.sparse import csr_matrix
            from scipy.sparse.csgraph import connected_components
            m = csr_matrix((self.lengths + 1.0, self.indices, self.indptr), shape=(self.n, self.n))
            self._component = connected_components(m, directed=False)[1]
        return self._component

    def visible_from(self, p: Sequence[float]) -> np.ndarray:
        """Boolean mask of graph nodes visible from an arbitrary free point."""
        return np.asarray(kernels.visible_mask(float(p[0]), float(p[1]), self.xs, self.ys,
                                               self.obstacles.kernel_edges), dtype=bool)

    def start_edges(self, p: Sequence[float]) -> list[tuple[int, float]]:
        """(node, travel time) pairs from an inserted point to every visible node."""
        mask = self.visible_from(p)
        ids = np.flatnonzero(mask)
        d = np.hypot(self.xs[ids] - p[0], self.ys[ids] - p[1]) / self.v_max
        return list(zip(ids.tolist(), d.tolist()))


def build_graph(obstacles: ObstacleSet, extra: Sequence[Sequence[float]], v_max: float
                ) -> tuple[VisibilityGraph, list[int]]:
    """Visibility graph on convex obstacle vertices plus ``extra`` points.

    Coincident points share a node; returns the graph and each extra's node id.
    """
    points: list[Point] = []
    ids: dict[Point, int] = {}

    def add(p) -> int:
        p = Point(float(p[0]), float(p[1]))
        k = ids.get(p)
        if k is None:
            k = ids[p] = len(points)
            points.append(p)
        return k

    for v in obstacles.convex_vertices:
        add(v)
    extra_ids = [add(p) for p in extra]
    n = len(points)
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    edges = obstacles.kernel_edges
    rows: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        if i + 1 >= n:
            break
        mask = kernels.visible_mask(xs[i], ys[i], xs[i + 1:], ys[i + 1:], edges)
        for k, ok in enumerate(mask):
            if ok:
                rows[i].append(i + 1 + k)
                rows[i + 1 + k].append(i)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        rows[i].sort()
        indptr[i + 1] = indptr[i] + len(rows[i])
    indices = np.array([j for r in rows for j in r], dtype=np.int64)
    src = np.repeat(np.arange(n), np.diff(indptr))
    lengths = np.hypot(xs[indices] - xs[src], ys[indices] - ys[src]) if n else np.zeros(0)
    g = VisibilityGraph(points, obstacles, float(v_max), indptr, indices,
                        np.asarray(lengths, dtype=np.float64), ids)
    return g, extra_ids


def build_visibility_graph(inst: Instance, nodes: Optional[list[WindowNode]] = None
                           ) -> VisibilityGraph:
    if nodes is None:
        nodes = window_nodes(inst)
    extra = [inst.depot]
    for s in nodes[1:]:
        a, b = s.segment()
        extra += [a, b]
    g, ids = build_graph(inst.obstacles, extra, inst.v_max)
    g.depot_id = ids[0]
    g.start_ids = [ids[0]] + ids[1::2]
    g.end_ids = [ids[0]] + ids[2::2]
    return g


@dataclass
class GoalArrays:
    """Visible interval sets of every base node toward one goal, in CSR form."""

    ptr: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    h: np.ndarray  # heuristic per base node, seconds


def _segment_distances(xs, ys, a, b) -> np.ndarray:
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        return np.hypot(xs - a[0], ys - a[1])
    u = np.clip(((xs - a[0]) * dx + (ys - a[1]) * dy) / den, 0.0, 1.0)
    return np.hypot(a[0] + u * dx - xs, a[1] + u * dy - ys)


def _csr(sets: list[IntervalSet]):
    ptr = np.zeros(len(sets) + 1, dtype=np.int64)
    lo, hi = [], []
    for k, s in enumerate(sets):
        for iv in s:
            lo.append(iv.lo)
            hi.append(iv.hi)
        ptr[k + 1] = len(lo)
    return ptr, np.array(lo, dtype=np.float64), np.array(hi, dtype=np.float64)


class VisibleIntervalTable:
    """vis(q, s) for every graph node q and window-node s, with per-goal caches."""

    def __init__(self, graph: VisibilityGraph, nodes: list[WindowNode],
                 entries: list[list[IntervalSet]]):
        self.graph = graph
        self.nodes = nodes
        self.entries = entries
        self._fwd: dict[int, GoalArrays] = {}
        self._rev: dict[int, GoalArrays] = {}

    def get(self, q: int, s) -> IntervalSet:
        k = s.index if isinstance(s, WindowNode) else int(s)
        return self.entries[k][q]

    def heuristic(self, s: WindowNode) -> np.ndarray:
        a, b = s.segment()
        return _segment_distances(self.graph.xs, self.graph.ys, a, b) / self.graph.v_max

    def arrays_for(self, s: WindowNode) -> GoalArrays:
        return self.reversed_goal_arrays(s) if s.reversed else self.goal_arrays(s)

    def goal_arrays(self, s: WindowNode) -> GoalArrays:
        ga = self._fwd.get(s.index)
        if ga is None:
            ptr, lo, hi = _csr(self.entries[s.index])
            ga = self._fwd[s.index] = GoalArrays(ptr, lo, hi, self.heuristic(s))
        return ga

    def reversed_goal_arrays(self, u: WindowNode) -> GoalArrays:
        """Entries toward the time-reversed copy of ``u``: vis(q, u) mirrored in time."""
        ga = self._rev.get(u.index)
        if ga is None:
            ptr, lo, hi = _csr([s.negated() for s in self.entries[u.index]])
            ga = self._rev[u.index] = GoalArrays(ptr, lo, hi, self.goal_arrays(u).h)
        return ga


def point_visible_intervals(p: Sequence[float], s: WindowNode, obstacles: ObstacleSet
                            ) -> IntervalSet:
    """vis(p, s) for an arbitrary free point (stationary unbounded nodes included)."""
    if s.unbounded:
        if geometry.segment_is_free(p, s.p0, obstacles):
            return IntervalSet([(s.t0, s.tf)])
        return IntervalSet()
    return geometry.visible_sub_intervals(p, s.motion(), obstacles, VIS_MARGIN)


def build_visible_interval_table(inst: Instance, g: VisibilityGraph,
                                 nodes: Optional[list[WindowNode]] = None
                                 ) -> VisibleIntervalTable:
    if nodes is None:
        nodes = window_nodes(inst)
    edges = inst.obstacles.kernel_edges
    depot_mask = np.zeros(g.n, dtype=bool)
    depot_mask[g.neighbors(g.depot_id)] = True
    depot_mask[g.depot_id] = True
    full = IntervalSet([(0.0, INF)])
    empty = IntervalSet()
    entries = [[full if depot_mask[q] else empty for q in range(g.n)]]
    for s in nodes[1:]:
        (px, py), (vx, vy), t0, tf = s.motion()
        row = []
        for q in range(g.n):
            raw = kernels.visible_intervals(g.xs[q], g.ys[q], px, py, vx, vy, t0, tf,
                                            edges, VIS_MARGIN)
            row.append(IntervalSet(raw) if raw else empty)
        entries.append(row)
    return VisibleIntervalTable(g, nodes, entries)


def shortest_path(g: VisibilityGraph, a: Sequence[float], b: Sequence[float]
                  ) -> tuple[float, list[Point]]:
    """Euclidean shortest obstacle-free path; a and b are inserted temporarily."""
    a = Point(float(a[0]), float(a[1]))
    b = Point(float(b[0]), float(b[1]))
    if geometry.segment_is_free(a, b, g.obstacles):
        return math.dist(a, b), [a, b]
    n = g.n
    ia = g.node_id(a)
    ib = g.node_id(b)
    src = ia if ia is not None else n
    dst = ib if ib is not None else n + 1
    a_adj = [] if ia is not None else np.flatnonzero(g.visible_from(a)).tolist()
    into_b = set() if ib is not None else set(np.flatnonzero(g.visible_from(b)).tolist())
    pts = g.points + [a, b]
    dist = {src: 0.0}
    parent = {src: -1}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == dst:
            break
        if v == n:
            nbrs = a_adj
        elif v == n + 1:
            nbrs = []
        else:
            nbrs = g.neighbors(v)
            if v in into_b:
                nbrs = nbrs + [n + 1]
        for w in nbrs:
            nd = d + math.dist(pts[v], pts[w])
            if nd < dist.get(w, INF):
                dist[w] = nd
                parent[w] = v
                heapq.heappush(heap, (nd, w))
    if dst not in done:
        return INF, []
    path = []
    v = dst
    while v != -1:
        path.append(pts[v])
        v = parent[v]
    path.reverse()
    return dist[dst], path


def write_dot(g: VisibilityGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write("graph visibility {\n")
        for i, p in enumerate(g.points):
            fh.write(f'  {i} [pos="{p[0]!r},{p[1]!r}!"];\n')
        for i, j in g.edges():
            fh.write(f"  {i} -- {j};\n")
        fh.write("}\n")


def write_interval_csv(tbl: VisibleIntervalTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q_id", "s_id", "intervals"])
        for s in tbl.nodes:
            for q in range(tbl.graph.n):
                ivs = tbl.get(q, s)
                w.writerow([q, s.index, ";".join(f"{a!r}:{b!r}" for a, b in ivs)])
