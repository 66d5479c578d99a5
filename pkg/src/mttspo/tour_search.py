"""Depth-first search over window-node sequences for a first feasible tour."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import geometry
from .model import (DEPOT, INF, Instance, Interception, Solution, Trajectory, WindowNode,
                    window_nodes)
from .planner import point_to_moving_target_search
from .visgraph import (VisibilityGraph, VisibleIntervalTable, build_visibility_graph,
                       build_visible_interval_table)
from .window_graph import (BudgetExceeded, TimeWindowGraph, build_time_window_graph,
                           max_lfdt_to_target)


class Status(str, Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    TIMEOUT = "TIMEOUT"


@dataclass(frozen=True)
class TreeNode:
    seq: tuple[WindowNode, ...]
    trajectory: Trajectory
    T: float
    visited: int  # bit i set once target i is intercepted
    times: tuple[float, ...] = ()  # interception time per non-depot entry of seq

    @property
    def last(self) -> WindowNode:
        return self.seq[-1]


@dataclass
class SearchStats:
    nodes_popped: int = 0
    astar_calls: int = 0
    prunes: int = 0
    visibility_s: Optional[float] = None
    twg_s: Optional[float] = None
    tree_s: Optional[float] = None

    def as_dict(self) -> dict:
        return {"visibility_s": self.visibility_s, "twg_s": self.twg_s, "tree_s": self.tree_s,
                "nodes_popped": self.nodes_popped, "astar_calls": self.astar_calls,
                "prunes": self.prunes}


@dataclass
class SolveResult:
    status: Status
    solution: Optional[Solution]
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


def _all_visited(n_targets: int) -> int:
    return ((1 << n_targets) - 1) << 1


def successor_window_nodes(node: TreeNode, gtw: TimeWindowGraph) -> list[WindowNode]:
    s = node.last
    done = node.visited == _all_visited(gtw.n_targets)
    out = []
    for v in gtw.successors(s):
        if v.is_depot:
            if not done:
                continue
        elif node.visited >> v.target & 1:
            continue
        if node.T <= gtw.label(s, v):
            out.append(v)
    return out


def lookahead(seq, T: float, gtw: TimeWindowGraph) -> bool:
    """False when some unvisited target can no longer be reached in time."""
    last = seq[-1]
    seen = {s.target for s in seq}
    for i in range(1, gtw.n_targets + 1):
        if i not in seen and T > max_lfdt_to_target(gtw, last, i):
            return False
    return True


def concatenate(tau: Trajectory, tail: Trajectory, tol: float = 1e-9) -> Trajectory:
    if not tail.waypoints:
        return tau
    (t1, p1) = tail.waypoints[0]
    (t0, p0) = tau.waypoints[-1]
    scale = max(1.0, abs(t0), abs(p0[0]), abs(p0[1]))
    if abs(t1 - t0) > tol * scale or math.dist(p0, p1) > tol * scale:
        raise ValueError(f"trajectories do not join: {(t0, p0)} vs {(t1, p1)}")
    return Trajectory(tau.waypoints + tail.waypoints[1:])


def dfs_solve(inst: Instance, g: VisibilityGraph, tbl: VisibleIntervalTable,
              gtw: TimeWindowGraph, budget: Optional[float] = None, use_lookahead: bool = True,
              stats: Optional[SearchStats] = None, deadline: Optional[float] = None,
              traces: Optional[list] = None) -> SolveResult:
    """First feasible tour in the prescribed depth-first order, or INFEASIBLE/TIMEOUT.

    When ``traces`` is a list, one expansion trace per search is appended to it.
    """
    if stats is None:
        stats = SearchStats()
    if deadline is None and budget is not None:
        deadline = time.perf_counter() + budget
    depot = gtw.nodes[0]
    root = TreeNode((depot,), Trajectory.at(0.0, inst.depot), 0.0, 0)
    if inst.n_targets == 0:
        sol = Solution(root.trajectory, 0.0, ())
        return SolveResult(Status.FEASIBLE, sol, stats)
    stack = [root]
    while stack:
        if deadline is not None and time.perf_counter() > deadline:
            return SolveResult(Status.TIMEOUT, None, stats)
        node = stack.pop()
        stats.nodes_popped += 1
        succ = successor_window_nodes(node, gtw)
        if not succ:
            continue
        p = node.trajectory.end_point
        start_edges = None if g.node_id(p) is not None else g.start_edges(p)
        children = []
        for s in succ:
            stats.astar_calls += 1
            trace = [] if traces is not None else None
            res = point_to_moving_target_search(p, node.T, s, g, tbl, start_edges, trace)
            if traces is not None:
                traces.append(trace)
            if not res.feasible:
                continue
            traj = concatenate(node.trajectory, res.trajectory)
            if s.is_depot:
                seq = tuple(Interception(w, t) for w, t in zip(node.seq[1:], node.times))
                return SolveResult(Status.FEASIBLE, Solution(traj, traj.end_time, seq), stats)
            seq = node.seq + (s,)
            if use_lookahead and not lookahead(seq, res.arrival, gtw):
                stats.prunes += 1
                continue
            children.append(TreeNode(seq, traj, res.arrival, node.visited | 1 << s.target,
                                     node.times + (res.arrival,)))
        children.sort(key=lambda c: (c.T, c.last.index), reverse=True)
        stack.extend(children)
    return SolveResult(Status.INFEASIBLE, None, stats)


@dataclass(eq=False)
class Prepared:
    """Static products shared by the tour search, the analysis and the CLI."""

    inst: Instance
    nodes: list[WindowNode]
    graph: VisibilityGraph
    table: VisibleIntervalTable
    gtw: Optional[TimeWindowGraph] = None


def prepare(inst: Instance, stats: Optional[SearchStats] = None,
            deadline: Optional[float] = None, with_gtw: bool = True) -> Prepared:
    t0 = time.perf_counter()
    nodes = window_nodes(inst)
    g = build_visibility_graph(inst, nodes)
    tbl = build_visible_interval_table(inst, g, nodes)
    t1 = time.perf_counter()
    gtw = build_time_window_graph(inst, g, tbl, nodes, deadline) if with_gtw else None
    t2 = time.perf_counter()
    if stats is not None:
        stats.visibility_s = t1 - t0
        stats.twg_s = t2 - t1
    return Prepared(inst, nodes, g, tbl, gtw)


def solve(inst: Instance, budget: Optional[float] = None, use_lookahead: bool = True,
          timing: bool = True, prep_out: Optional[list] = None,
          traces: Optional[list] = None) -> SolveResult:
    """Full pipeline: visibility products, window graph, then the tree search.

    With ``timing=False`` the phase times are left as None so repeated runs
    produce identical stats.
    """
    stats = SearchStats()
    deadline = None if budget is None else time.perf_counter() + budget
    try:
        prep = prepare(inst, stats, deadline)
    except BudgetExceeded:
        if not timing:
            stats.visibility_s = stats.twg_s = None
        return SolveResult(Status.TIMEOUT, None, stats)
    if prep_out is not None:
        prep_out.append(prep)
    t0 = time.perf_counter()
    res = dfs_solve(inst, prep.graph, prep.table, prep.gtw, use_lookahead=use_lookahead,
                    stats=stats, deadline=deadline, traces=traces)
    stats.tree_s = time.perf_counter() - t0
    if not timing:
        stats.visibility_s = stats.twg_s = stats.tree_s = None
    return res


def check_tree_node(inst: Instance, node: TreeNode, tol: float = 1e-6) -> list[str]:
    """Invariant violations of a tree node (empty when consistent)."""
    problems = []
    wp = node.trajectory.waypoints
    scale = inst.scale()
    if wp[0][0] != 0.0 or math.dist(wp[0][1], inst.depot) > tol * scale:
        problems.append("does not start at the depot at time 0")
    if wp[-1][0] != node.T:
        problems.append("T differs from the last waypoint time")
    for (ta, pa), (tb, pb) in zip(wp, wp[1:]):
        if math.dist(pa, pb) > inst.v_max * (1 + tol) * (tb - ta) + 1e-9 * scale:
            problems.append(f"overspeed on leg starting at t={ta}")
        if not geometry.segment_is_free(pa, pb, inst.obstacles):
            problems.append(f"leg starting at t={ta} enters an obstacle")
    prev = 0.0
    for s, t in zip(node.seq[1:], node.times):
        if s.target == DEPOT or not (s.t0 <= t <= s.tf) or t < prev:
            problems.append(f"interception of {s.label()} at {t} out of order or window")
        elif math.dist(node.trajectory.position(t), s.position(t)) > tol * scale:
            problems.append(f"agent misses {s.label()} at {t}")
        prev = t
    return problems
