"""Point-to-moving-target planning on the moving-target visibility graph.

The graph is the static visibility graph plus a start point and one goal
window-node whose incoming edge costs depend on departure time.  A* over it
returns the earliest interception; latest feasible departure times come from
running the same search in reversed time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import geometry, kernels
from .geometry import IntervalSet, Point
from .model import INF, InstanceError, Trajectory, WindowNode
from .visgraph import GoalArrays, VisibilityGraph, VisibleIntervalTable, point_visible_intervals


class PlanStatus(str, Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True, eq=False)
class Mtvg:
    """Visibility graph augmented with a start point and a moving goal.

    ``start_id`` is an existing node when the start coincides with one
    (``start_edges`` is then None), else ``graph.n``.
    """

    graph: VisibilityGraph
    start: Point
    start_id: int
    start_edges: Optional[list]
    goal: WindowNode
    goal_arrays: GoalArrays
    start_goal: IntervalSet
    h_start: float

    def goal_edges(self) -> dict[int, IntervalSet]:
        """Nodes with a nonempty visible interval set toward the goal."""
        ga = self.goal_arrays
        out = {}
        for q in range(self.graph.n):
            k0, k1 = ga.ptr[q], ga.ptr[q + 1]
            if k1 > k0:
                out[q] = IntervalSet(zip(ga.lo[k0:k1], ga.hi[k0:k1]))
        if self.start_id == self.graph.n and self.start_goal:
            out[self.graph.n] = self.start_goal
        return out


@dataclass(frozen=True)
class PlanResult:
    status: PlanStatus
    trajectory: Optional[Trajectory]
    arrival: float
    path: tuple[int, ...] = ()
    expansions: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is PlanStatus.FEASIBLE


def sft(q: Sequence[float], t: float, s: WindowNode, interval: Sequence[float],
        v_max: float) -> float:
    """Shortest straight-line travel time from (q, t) to s within ``interval``."""
    px, py, vx, vy, tref = s.motion_tuple()
    ts = kernels.earliest_intercept(float(q[0]), float(q[1]), float(t), px, py, vx, vy, tref,
                                    float(v_max), [float(interval[0])], [float(interval[1])])
    return ts - t


def edge_cost_to_goal(q: Sequence[float], s: WindowNode, t: float, vis_qs: IntervalSet,
                      v_max: float) -> float:
    """Minimum over the visible intervals of the straight-line travel time."""
    if not vis_qs:
        return INF
    px, py, vx, vy, tref = s.motion_tuple()
    los = [iv.lo for iv in vis_qs]
    his = [iv.hi for iv in vis_qs]
    ts = kernels.earliest_intercept(float(q[0]), float(q[1]), float(t), px, py, vx, vy, tref,
                                    float(v_max), los, his)
    return ts - t


def heuristic(v: Sequence[float], s: WindowNode, v_max: float) -> float:
    a, b = s.segment()
    return geometry.distance_point_segment(v, a, b) / v_max


def reverse_node(u: WindowNode) -> WindowNode:
    """Time-reversed copy of u: window [-tf, -t0], position tau_u(-t)."""
    if u.unbounded:
        return WindowNode(-u.target, -u.tf, -u.t0, u.index, u.window, u.p0, (0.0, 0.0), 0.0,
                          not u.reversed)
    return WindowNode(-u.target, -u.tf, -u.t0, u.index, u.window, u.position(u.tf),
                      (-u.vel[0], -u.vel[1]), -u.tf, not u.reversed)


def construct_mtvg(p: Sequence[float], T: float, s: WindowNode, g: VisibilityGraph,
                   tbl: VisibleIntervalTable, start_edges: Optional[list] = None) -> Mtvg:
    p = Point(float(p[0]), float(p[1]))
    ga = tbl.arrays_for(s)
    sid = g.node_id(p)
    if sid is not None:
        return Mtvg(g, p, sid, None, s, ga, IntervalSet(), float(ga.h[sid]))
    if geometry.point_in_interior(p, g.obstacles):
        raise InstanceError(f"start point {tuple(p)} lies inside an obstacle")
    if start_edges is None:
        start_edges = g.start_edges(p)
    return Mtvg(g, p, g.n, start_edges, s, ga,
                point_visible_intervals(p, s, g.obstacles), heuristic(p, s, g.v_max))


def search_mtvg(m: Mtvg, T: float, trace: Optional[list] = None) -> PlanResult:
    g = m.graph
    s = m.goal
    n = g.n
    xs = np.append(g.xs, m.start[0])
    ys = np.append(g.ys, m.start[1])
    h = np.append(m.goal_arrays.h, m.h_start)
    slo = [iv.lo for iv in m.start_goal]
    shi = [iv.hi for iv in m.start_goal]
    cap = s.tf - T
    ga = m.goal_arrays
    gvals, parent, t_goal, expansions = kernels.astar(
        n, g.kernel_graph, xs, ys, h, m.start_id, m.start_edges, ga.ptr, ga.lo, ga.hi,
        slo, shi, s.motion_tuple(), g.v_max, float(T), cap, trace)
    if not t_goal < INF:
        return PlanResult(PlanStatus.INFEASIBLE, None, INF, (), int(expansions))
    path = []
    v = int(parent[n + 1])
    while v != -1:
        path.append(v)
        v = int(parent[v])
    path.reverse()
    traj = construct_trajectory(m, path, gvals, T, t_goal)
    return PlanResult(PlanStatus.FEASIBLE, traj, float(t_goal), tuple(path), int(expansions))


def construct_trajectory(m: Mtvg, path: Sequence[int], gvals, T: float, t_goal: float
                         ) -> Trajectory:
    """Max-speed legs through the path's nodes, then the final straight interception."""
    g = m.graph
    wp = [(float(T), m.start)]
    for v in path[1:]:
        wp.append((T + float(gvals[v]), g.points[v]))
    end = m.goal.position(t_goal)
    if end != wp[-1][1] or t_goal != wp[-1][0]:
        wp.append((float(t_goal), end))
    return Trajectory(tuple(wp))


def point_to_moving_target_search(p: Sequence[float], T: float, s: WindowNode,
                                  g: VisibilityGraph, tbl: VisibleIntervalTable,
                                  start_edges: Optional[list] = None,
                                  trace: Optional[list] = None) -> PlanResult:
    """Earliest interception of s departing from point p at time T."""
    return search_mtvg(construct_mtvg(p, T, s, g, tbl, start_edges), T, trace)


def latest_departure(u: WindowNode, point: Sequence[float], deadline: float,
                     g: VisibilityGraph, tbl: VisibleIntervalTable) -> float:
    """Latest t in u's window such that leaving tau_u(t) at t reaches ``point`` by
    ``deadline``; -inf if none."""
    res = point_to_moving_target_search(point, -deadline, reverse_node(u), g, tbl)
    if not res.feasible:
        return -INF
    return -res.arrival


def lfdt(u: WindowNode, v: WindowNode, g: VisibilityGraph, tbl: VisibleIntervalTable,
         inst=None) -> float:
    """Latest feasible departure from u that still reaches v's window end on time.

    For the depot as destination there is no deadline: the answer is tf(u)
    when the depot is reachable from u's segment at all, else -inf.
    """
    if v.is_depot:
        comp = g.components()
        if comp[g.end_ids[u.index]] == comp[g.depot_id]:
            return u.tf
        return -INF
    target = g.points[g.end_ids[v.index]]
    return latest_departure(u, target, v.tf, g, tbl)
