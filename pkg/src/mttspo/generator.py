"""Random instances that are feasible by construction.

An agent route through sampled interception points (depot -> p1 -> ... -> pN
-> depot, at beta * v_max along shortest paths) is fixed first; each target's
piecewise-linear motion is then drawn so that it passes p_i at the instant the
route does, and the windows are cut around that instant.  The route is kept as
a witness solution.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .geometry import Grid, ObstacleSet, Point
from .model import (Instance, Interception, Solution, TargetWindow, Trajectory, WindowNode,
                    validate_instance, window_nodes)
from .visgraph import build_graph, shortest_path

RETRIES = 1000


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    n_targets: int = 4
    windows_per_target: int = 2
    sum_window_len: float = 26.0
    rows: int = 10
    cols: int = 10
    cell_size: float = 2.0
    occupancy_fraction: float = 0.2
    v_max: float = 1.0
    beta: float = 0.99
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _rng(seed, *tags) -> np.random.Generator:
    return np.random.default_rng([int(seed), *(int(t) for t in tags)])


def _free_point(rng, grid: Grid, free_cells) -> Point:
    r, c = free_cells[rng.integers(len(free_cells))]
    u, v = rng.random(2)
    return Point(float((c + u) * grid.cell_size), float((r + v) * grid.cell_size))


def _in_bounds(p, grid: Grid) -> bool:
    return 0.0 <= p[0] <= grid.width and 0.0 <= p[1] <= grid.height


def sample_target(rng, target_id: int, p_hit: Point, t_hit: float, k: int, total: float,
                  v_max: float, grid: Grid, obstacles: ObstacleSet,
                  retries: int = RETRIES) -> tuple[TargetWindow, ...]:
    """k windows summing to ``total`` on a k-segment motion through (p_hit, t_hit).

    Raises GenerationError after ``retries`` rejected draws.
    """
    for _ in range(retries):
        lens = rng.dirichlet(np.ones(k)) * total if k > 1 else np.array([total])
        lens[-1] = total - lens[:-1].sum()
        durs = 1.5 * lens
        span = float(durs.sum())
        start = max(0.0, t_hit - rng.random() * span)
        edges_t = start + np.concatenate(([0.0], np.cumsum(durs)))
        edges_t[-1] = max(edges_t[-1], t_hit)
        j_hit = int(np.searchsorted(edges_t, t_hit, side="right") - 1)
        j_hit = min(max(j_hit, 0), k - 1)
        angles = rng.random(k) * 2.0 * math.pi
        speeds = rng.uniform(v_max / 8.0, v_max / 4.0, k)
        vel = np.stack([speeds * np.cos(angles), speeds * np.sin(angles)], axis=1)
        # knot positions at segment boundaries, anchored at the hit instant
        knots = np.zeros((k + 1, 2))
        knots[j_hit] = np.asarray(p_hit) - vel[j_hit] * (t_hit - edges_t[j_hit])
        for j in range(j_hit, k):
            knots[j + 1] = knots[j] + vel[j] * (edges_t[j + 1] - edges_t[j])
        for j in range(j_hit - 1, -1, -1):
            knots[j] = knots[j + 1] - vel[j] * (edges_t[j + 1] - edges_t[j])
        wins = []
        for j in range(k):
            a, b = edges_t[j], edges_t[j + 1]
            if j == j_hit:
                lo = max(a, t_hit - lens[j])
                hi = min(b - lens[j], t_hit)
                t0 = lo + rng.random() * max(hi - lo, 0.0)
                t0 = min(t0, t_hit)
            else:
                t0 = a + rng.random() * max(b - a - lens[j], 0.0)
            tf = t0 + lens[j]
            if j == j_hit:
                tf = max(tf, t_hit)
                p0 = Point(float(p_hit[0] - vel[j][0] * (t_hit - t0)),
                           float(p_hit[1] - vel[j][1] * (t_hit - t0)))
            else:
                p0 = Point(*(knots[j] + vel[j] * (t0 - a)).tolist())
            wins.append(TargetWindow(target_id, float(t0), float(tf), p0,
                                     (float(vel[j][0]), float(vel[j][1]))))
        if _windows_ok(wins, grid, obstacles):
            return tuple(wins)
    raise GenerationError(f"could not place windows for target {target_id}")


def _windows_ok(wins, grid: Grid, obstacles: ObstacleSet) -> bool:
    prev = -math.inf
    for w in wins:
        if not (w.t0 < w.tf and w.t0 > prev):
            return False
        prev = w.tf
        a, b = w.p0, w.p_end
        if not (_in_bounds(a, grid) and _in_bounds(b, grid)):
            return False
        if not geometry.segment_is_free(a, b, obstacles):
            return False
    return True


def _sample_grid(rng, p: GenParams) -> Grid:
    n_cells = p.rows * p.cols
    n_occ = int(round(p.occupancy_fraction * n_cells))
    flat = rng.choice(n_cells, size=n_occ, replace=False) if n_occ else []
    occ = frozenset((int(f) // p.cols, int(f) % p.cols) for f in flat)
    return Grid(p.rows, p.cols, float(p.cell_size), occ)


def generate_instance(params: GenParams) -> tuple[Instance, Solution]:
    """Instance plus the witness solution that proves it feasible."""
    p = params
    if not (0.0 <= p.occupancy_fraction < 1.0):
        raise ValueError("occupancy_fraction must be in [0, 1)")
    if p.n_targets < 0 or p.windows_per_target < 1 or not p.sum_window_len > 0:
        raise ValueError("n_targets >= 0, windows_per_target >= 1, sum_window_len > 0 required")
    rng = _rng(p.seed)
    grid = _sample_grid(rng, p)
    obstacles = grid.obstacles()
    free = [(r, c) for r in range(p.rows) for c in range(p.cols) if (r, c) not in grid.occupied]
    g, _ = build_graph(obstacles, [], p.v_max)
    speed = p.beta * p.v_max
    depot = _free_point(rng, grid, free)
    route = [(0.0, depot)]
    hits = []
    targets = []
    t_prev, p_prev = 0.0, depot
    for i in range(1, p.n_targets + 1):
        # a cramped interception point can make window placement hopeless, so
        # after a few rejected motions the point itself is redrawn
        for _ in range(RETRIES):
            p_hit = _free_point(rng, grid, free)
            dist, path = shortest_path(g, p_prev, p_hit)
            if not math.isfinite(dist):
                continue
            t_hit = t_prev
            for a, b in zip(path, path[1:]):
                t_hit += math.dist(a, b) / speed
            try:
                wins = sample_target(rng, i, p_hit, t_hit, p.windows_per_target,
                                     p.sum_window_len, p.v_max, grid, obstacles, retries=20)
            except GenerationError:
                continue
            break
        else:
            raise GenerationError(f"seed {p.seed}: could not place target {i}")
        t = t_prev
        for a, b in zip(path, path[1:]):
            t += math.dist(a, b) / speed
            route.append((t, Point(*b)))
        assert t == t_hit
        targets.append(wins)
        hits.append((i, t_hit))
        t_prev, p_prev = t_hit, p_hit
    dist, path = shortest_path(g, p_prev, depot)
    t = t_prev
    for a, b in zip(path, path[1:]):
        t += math.dist(a, b) / speed
        route.append((t, Point(*b)))
    inst = Instance(obstacles, depot, float(p.v_max), tuple(targets), grid)
    validate_instance(inst)
    return inst, _witness(inst, route, hits)


def _witness(inst: Instance, route, hits) -> Solution:
    wp = []
    for t, q in route:
        if wp and wp[-1][0] == t and wp[-1][1] == q:
            continue
        wp.append((t, q))
    nodes = window_nodes(inst)
    seq = []
    for i, t in hits:
        node = next(n for n in nodes if n.target == i and n.t0 <= t <= n.tf)
        seq.append(Interception(node, t))
    traj = Trajectory(tuple(wp))
    return Solution(traj, traj.end_time, tuple(seq))


def _hit_times(inst: Instance, witness: Solution) -> dict[int, float]:
    return {ic.node.target: ic.time for ic in witness.window_sequence}


def _rebind(inst: Instance, witness: Solution, targets) -> tuple[Instance, Solution]:
    new = replace(inst, targets=tuple(targets))
    validate_instance(new)
    nodes = window_nodes(new)
    seq = []
    for ic in witness.window_sequence:
        node = next(n for n in nodes if n.target == ic.node.target and n.t0 <= ic.time <= n.tf)
        seq.append(Interception(node, ic.time))
    return new, Solution(witness.trajectory, witness.final_time, tuple(seq))


def shorten_windows(inst: Instance, witness: Solution, new_sum: float, seed: int
                    ) -> tuple[Instance, Solution]:
    """Scale every target's windows to total ``new_sum``, keeping the witness hit."""
    if not new_sum > 0:
        raise GenerationError(f"seed {seed}: window sum {new_sum} too small to hold the witness")
    hits = _hit_times(inst, witness)
    rng = _rng(seed, 1, int(round(new_sum * 1000)))
    targets = []
    for i, wins in enumerate(inst.targets, start=1):
        total = sum(w.tf - w.t0 for w in wins)
        if new_sum > total * (1 + 1e-12):
            raise GenerationError(f"seed {seed}: cannot lengthen windows of target {i}")
        ratio = new_sum / total
        th = hits[i]
        out = []
        for w in wins:
            length = (w.tf - w.t0) * ratio
            if w.t0 <= th <= w.tf:
                lo = max(w.t0, th - length)
                hi = min(w.tf - length, th)
            else:
                lo, hi = w.t0, w.tf - length
            t0 = lo + rng.random() * max(hi - lo, 0.0)
            tf = min(t0 + length, w.tf)
            if w.t0 <= th <= w.tf:
                t0, tf = min(t0, th), max(tf, th)
            out.append(TargetWindow(i, t0, tf, w.position(t0), w.vel))
        targets.append(tuple(out))
    return _rebind(inst, witness, targets)


def split_windows(inst: Instance, witness: Solution, k: int, seed: int
                  ) -> tuple[Instance, Solution]:
    """Redraw each single-window target as k windows with the same total length."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if any(len(w) != 1 for w in inst.targets):
        raise ValueError("split_windows expects one window per target")
    if k == 1:
        return inst, witness
    if inst.grid is None:
        raise ValueError("split_windows needs the instance grid for bounds")
    hits = _hit_times(inst, witness)
    rng = _rng(seed, 2, k)
    targets = []
    for i, (w,) in enumerate(inst.targets, start=1):
        th = hits[i]
        try:
            wins = sample_target(rng, i, w.position(th), th, k, w.tf - w.t0, inst.v_max,
                                 inst.grid, inst.obstacles)
        except GenerationError as exc:
            raise GenerationError(f"seed {seed}: {exc}") from None
        targets.append(wins)
    return _rebind(inst, witness, targets)
