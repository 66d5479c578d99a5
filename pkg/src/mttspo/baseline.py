"""Sampled-points baseline: discretize windows, then search a generalized tour.

Each target's windows are sampled at uniform offsets along their concatenated
length.  Transfers between samples move at full speed along shortest paths and
then wait.  Because transfers only go forward in time, a tour visiting one
sample per target is a path in a DAG, and an exact dynamic program over
(visited targets, current sample) decides whether one exists.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path as csgraph_shortest_path

from . import kernels
from .geometry import Point
from .model import INF, Instance, Interception, Solution, Trajectory, window_nodes
from .tour_search import Status
from .visgraph import VisibilityGraph, build_graph

SAME_TIME_SHIFT = 1e-9
DEFAULT_CAP = 12


class CapabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplePoint:
    target_id: int
    window_index: int
    t: float
    p: Point


def sample_points(inst: Instance, n_per_target: int) -> list[SamplePoint]:
    """n samples per target at offsets k L/(n-1) of the concatenated windows.

    A single sample sits at the first window's start; an offset on a seam
    between windows goes to the earlier window's end.  Samples of different
    targets that coincide in space and time are separated by shifting the
    later target's sample by SAME_TIME_SHIFT seconds (backwards at a window end).
    """
    if n_per_target < 1:
        raise ValueError("n_per_target must be >= 1")
    out: list[SamplePoint] = []
    seen: set = set()
    for i, wins in enumerate(inst.targets, start=1):
        lens = [w.tf - w.t0 for w in wins]
        total = sum(lens)
        n = n_per_target
        for k in range(n):
            off = 0.0 if n == 1 else (total if k == n - 1 else k * total / (n - 1))
            acc = 0.0
            for j, w in enumerate(wins):
                if off <= acc + lens[j] or j == len(wins) - 1:
                    t = min(w.t0 + (off - acc), w.tf)
                    break
                acc += lens[j]
            p = w.position(t)
            if (t, p) in seen:
                # shift forward, or backward when already at the window end
                t = t + SAME_TIME_SHIFT if t + SAME_TIME_SHIFT <= w.tf else t - SAME_TIME_SHIFT
                p = w.position(t)
            seen.add((t, p))
            out.append(SamplePoint(i, j, t, p))
    return out


@dataclass(eq=False)
class TransferTable:
    """Shortest travel distances between the depot (row/col P) and all samples."""

    points: list[SamplePoint]
    depot: Point
    dist: np.ndarray  # (P+1, P+1) meters; index P is the depot
    graph: VisibilityGraph
    base_dist: np.ndarray
    base_pred: np.ndarray
    vis: np.ndarray  # (P+1, V) visibility of base nodes from each point
    v_max: float
    direct: np.ndarray  # (P+1, P+1) straight segment free (where it was needed)

    def coords(self, a: int) -> Point:
        return self.depot if a == len(self.points) else self.points[a].p

    def time(self, a: int) -> float:
        return 0.0 if a == len(self.points) else self.points[a].t

    def feasible(self, a: int, b: int) -> bool:
        """Transfer from a to b in time (b == depot: no deadline)."""
        d = self.dist[a, b]
        if not math.isfinite(d):
            return False
        if b == len(self.points):
            return True
        return self.time(a) <= self.time(b) and d / self.v_max <= self.time(b) - self.time(a)

    def feasibility_matrix(self) -> np.ndarray:
        """feas[a, b] for samples a, b (depot excluded)."""
        P = len(self.points)
        t = np.array([sp.t for sp in self.points])
        dt = t[None, :] - t[:, None]
        d = self.dist[:P, :P]
        feas = (dt >= 0) & np.isfinite(d) & (d / self.v_max <= dt)
        np.fill_diagonal(feas, False)
        return feas

    def slack(self, a: int, b: int) -> float:
        return self.time(b) - self.time(a) - self.dist[a, b] / self.v_max

    def path(self, a: int, b: int) -> list[Point]:
        pa, pb = self.coords(a), self.coords(b)
        if pa == pb:
            return [pa]
        g = self.graph
        da = np.hypot(g.xs - pa[0], g.ys - pa[1])
        db = np.hypot(g.xs - pb[0], g.ys - pb[1])
        best = INF
        if self.direct[a, b]:
            best = math.dist(pa, pb)
            route = [pa, pb]
        ia = np.flatnonzero(self.vis[a])
        ib = np.flatnonzero(self.vis[b])
        if len(ia) and len(ib):
            tot = da[ia][:, None] + self.base_dist[np.ix_(ia, ib)] + db[ib][None, :]
            k = np.unravel_index(np.argmin(tot), tot.shape)
            if tot[k] < best:
                q, q2 = int(ia[k[0]]), int(ib[k[1]])
                chain = [q2]
                while chain[-1] != q:
                    chain.append(int(self.base_pred[q, chain[-1]]))
                route = [pa] + [g.points[v] for v in reversed(chain)] + [pb]
        return route


def pairwise_transfers(points: list[SamplePoint], inst: Instance,
                       g: Optional[VisibilityGraph] = None,
                       base: Optional[tuple] = None) -> TransferTable:
    """All-pairs shortest obstacle-free distances among depot and samples.

    The straight segment between two samples is only tested when it could fit
    in their time gap, so distances of pairs that are too close in time to be
    feasible anyway may be upper bounds.
    """
    if g is None:
        g, _ = build_graph(inst.obstacles, [inst.depot], inst.v_max)
    if base is None:
        base = base_shortest_paths(g)
    bd, pred = base
    coords = [s.p for s in points] + [Point(*inst.depot)]
    m = len(coords)
    xs = np.array([c[0] for c in coords])
    ys = np.array([c[1] for c in coords])
    edges = inst.obstacles.kernel_edges
    vis = np.zeros((m, g.n), dtype=bool)
    for a in range(m):
        vis[a] = kernels.visible_mask(xs[a], ys[a], g.xs, g.ys, edges)
    dq = np.hypot(xs[:, None] - g.xs[None, :], ys[:, None] - g.ys[None, :])  # (m, V)
    # reach[a, q'] = min over q visible from a of |a q| + D(q, q')
    reach = np.full((m, g.n), INF)
    for a in range(m):
        ids = np.flatnonzero(vis[a])
        if len(ids):
            reach[a] = np.min(dq[a, ids][:, None] + bd[ids], axis=0)
    dist = np.full((m, m), INF)
    into = np.where(vis, dq, INF)  # (m, V): |q' b| where visible
    for a in range(m):
        dist[a] = np.min(reach[a][None, :] + into, axis=1) if g.n else INF
    euclid = np.hypot(xs[:, None] - xs[None, :], ys[:, None] - ys[None, :])
    # a straight segment only matters where it beats the graph route and could
    # fit in the time gap (pairs with the depot have no deadline)
    ts = np.array([sp.t for sp in points] + [0.0])
    gap = np.abs(ts[:, None] - ts[None, :]) * inst.v_max
    cand = (euclid < dist) & (euclid <= gap * (1 + 1e-12))
    cand[m - 1, :] = cand[:, m - 1] = euclid[m - 1] < dist[m - 1]
    direct = np.eye(m, dtype=bool)
    for a, b in zip(*np.nonzero(np.triu(cand, 1))):
        if kernels.segment_is_free(xs[a], ys[a], xs[b], ys[b], edges, 1e-9):
            direct[a, b] = direct[b, a] = True
    dist = np.where(direct, np.minimum(dist, euclid), dist)
    tbl = TransferTable(points, Point(*inst.depot), dist, g, bd, pred, vis, inst.v_max, direct)
    return tbl


def base_shortest_paths(g: VisibilityGraph):
    if g.n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0), dtype=np.int64)
    mat = csr_matrix((g.lengths, g.indices, g.indptr), shape=(g.n, g.n))
    d, pred = csgraph_shortest_path(mat, method="D", directed=False, return_predecessors=True)
    return d, pred


def solve_gtsp_feasibility(table: TransferTable, n_clusters: int,
                           cap: int = DEFAULT_CAP) -> Optional[list[int]]:
    """Sample indices visiting each cluster once, in time order, or None.

    Samples are processed by time.  For each sample the DP keeps, as a bitset
    over cluster masks, every set of clusters a depot-anchored path can have
    covered when it ends there; extending by cluster c maps mask m (without
    c) to m | c, which is a left shift of the bitset by c.
    """
    if n_clusters > cap:
        raise CapabilityError(f"{n_clusters} targets exceeds the cap of {cap}")
    pts = table.points
    P = len(pts)
    depot = P
    if n_clusters == 0:
        return []
    n_masks = 1 << n_clusters
    full = n_masks - 1
    # lacking[c]: bitset of masks without bit c
    lacking = {}
    for c in range(n_clusters):
        bits = 0
        for m in range(n_masks):
            if not m >> c & 1:
                bits |= 1 << m
        lacking[1 << c] = bits
    feas = table.feasibility_matrix()
    order = sorted(range(P), key=lambda a: (pts[a].t, a))
    states = [0] * P
    for b in order:
        cb = 1 << (pts[b].target_id - 1)
        acc = 0
        for a in np.flatnonzero(feas[:, b]).tolist():
            acc |= states[a]
        st = (acc & lacking[cb]) << cb
        if table.feasible(depot, b):
            st |= 1 << cb
        states[b] = st
    for b in range(P):
        if states[b] >> full & 1 and table.feasible(b, depot):
            seq = [b]
            mask = full
            while True:
                cur = seq[-1]
                mask &= ~(1 << (pts[cur].target_id - 1))
                if mask == 0:
                    break
                for a in np.flatnonzero(feas[:, cur]).tolist():
                    if states[a] >> mask & 1:
                        seq.append(a)
                        break
                else:  # pragma: no cover - DP bookkeeping guarantees a predecessor
                    raise RuntimeError("inconsistent tour reconstruction")
            return list(reversed(seq))
    return None


@dataclass
class Attempt:
    n_per_target: int
    wall_s: Optional[float]
    status: str


@dataclass
class BaselineResult:
    status: Status
    solution: Optional[Solution]
    attempts: list[Attempt] = field(default_factory=list)
    wall_s: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    @property
    def escalations(self) -> int:
        return max(len(self.attempts) - 1, 0)


def assemble_solution(inst: Instance, table: TransferTable, seq: list[int]) -> Solution:
    """Full-speed moves along shortest paths, waiting at each sample until its time."""
    depot = len(table.points)
    vmax = inst.v_max
    wp = [(0.0, Point(*inst.depot))]
    stops = [depot] + list(seq) + [depot]
    nodes = window_nodes(inst)
    lookup = {(n.target, n.window): n for n in nodes}
    hits = []
    for a, b in zip(stops, stops[1:]):
        t = wp[-1][0]
        route = table.path(a, b)
        for u, v in zip(route, route[1:]):
            t += math.dist(u, v) / vmax
            wp.append((t, v))
        if b != depot:
            s = table.points[b]
            if wp[-1][0] < s.t or wp[-1][1] != s.p:
                wp.append((max(s.t, wp[-1][0]), s.p))
            hits.append(Interception(lookup[(s.target_id, s.window_index)], s.t))
    traj = Trajectory(tuple(wp))
    return Solution(traj, traj.end_time, tuple(hits))


def baseline_solve(inst: Instance, g: Optional[VisibilityGraph] = None, start_n: int = 10,
                   step: int = 10, budget: Optional[float] = 300.0, cap: int = DEFAULT_CAP,
                   max_n: Optional[int] = None, timing: bool = True) -> BaselineResult:
    """Escalate samples per target until the sampled tour search succeeds.

    Wall time covers every attempt; TIMEOUT is returned once ``budget`` runs
    out (checked between stages) or ``max_n`` is passed.
    """
    t_start = time.perf_counter()
    deadline = None if budget is None else t_start + budget
    res = BaselineResult(Status.TIMEOUT, None)
    if inst.n_targets > cap:
        raise CapabilityError(f"{inst.n_targets} targets exceeds the cap of {cap}")

    def over() -> bool:
        return deadline is not None and time.perf_counter() >= deadline

    if inst.n_targets == 0:
        traj = Trajectory.at(0.0, inst.depot)
        res.status, res.solution = Status.FEASIBLE, Solution(traj, 0.0, ())
        return res
    if over():
        return res
    if g is None:
        g, _ = build_graph(inst.obstacles, [inst.depot], inst.v_max)
    base = base_shortest_paths(g)
    n = start_n
    while max_n is None or n <= max_n:
        if over():
            break
        t0 = time.perf_counter()
        pts = sample_points(inst, n)
        table = pairwise_transfers(pts, inst, g, base)
        if over():
            res.attempts.append(Attempt(n, _t(t0, timing), "TIMEOUT"))
            break
        seq = solve_gtsp_feasibility(table, inst.n_targets, cap)
        if seq is not None:
            res.attempts.append(Attempt(n, _t(t0, timing), "FEASIBLE"))
            res.status = Status.FEASIBLE
            res.solution = assemble_solution(inst, table, seq)
            break
        res.attempts.append(Attempt(n, _t(t0, timing), "INFEASIBLE"))
        n += step
    res.wall_s = time.perf_counter() - t_start
    return res


def _t(t0: float, timing: bool) -> Optional[float]:
    return time.perf_counter() - t0 if timing else None
