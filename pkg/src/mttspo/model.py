"""Instances, window-nodes, trajectories, solutions and the feasibility validator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import geometry
from .geometry import Grid, Motion, ObstacleSet, Point

INF = math.inf
DEPOT = 0


class InstanceError(ValueError):
    """Malformed or invalid instance/solution data."""


@dataclass(frozen=True)
class TargetWindow:
    target_id: int
    t0: float
    tf: float
    p0: Point
    vel: tuple[float, float]

    def position(self, t: float) -> Point:
        return Point(self.p0[0] + self.vel[0] * (t - self.t0),
                     self.p0[1] + self.vel[1] * (t - self.t0))

    @property
    def p_end(self) -> Point:
        return self.position(self.tf)

    @property
    def speed(self) -> float:
        return math.hypot(*self.vel)

    def motion(self) -> Motion:
        return Motion(self.p0, self.vel, self.t0, self.tf)


@dataclass(frozen=True, eq=False)
class Instance:
    obstacles: ObstacleSet
    depot: Point
    v_max: float
    targets: tuple[tuple[TargetWindow, ...], ...]
    grid: Optional[Grid] = None

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    def windows(self):
        for wins in self.targets:
            yield from wins

    def scale(self) -> float:
        """Instance diameter: bounding-box diagonal of the map, depot and windows."""
        xs = [self.depot[0]]
        ys = [self.depot[1]]
        for w in self.windows():
            for p in (w.p0, w.p_end):
                xs.append(p[0])
                ys.append(p[1])
        b = self.obstacles.bounds()
        if b is not None:
            xs += [b[0], b[2]]
            ys += [b[1], b[3]]
        if self.grid is not None:
            xs += [0.0, self.grid.width]
            ys += [0.0, self.grid.height]
        d = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
        return d if d > 0 else 1.0


def validate_instance(inst: Instance) -> None:
    """Raise InstanceError unless every instance invariant holds."""
    if not (math.isfinite(inst.v_max) and inst.v_max > 0):
        raise InstanceError("v_max must be positive and finite")
    if not all(math.isfinite(c) for c in inst.depot):
        raise InstanceError("depot must be finite")
    pair = geometry.overlapping_polygons(inst.obstacles)
    if pair is not None:
        raise InstanceError(f"obstacle polygons {pair[0]} and {pair[1]} overlap")
    if geometry.point_in_interior(inst.depot, inst.obstacles):
        raise InstanceError("depot lies inside an obstacle")
    for i, wins in enumerate(inst.targets, start=1):
        if not wins:
            raise InstanceError(f"target {i} has no windows")
        prev_tf = -INF
        for w in wins:
            vals = (w.t0, w.tf, *w.p0, *w.vel)
            if not all(math.isfinite(v) for v in vals):
                raise InstanceError(f"target {i}: non-finite window data")
            if w.target_id != i:
                raise InstanceError(f"target {i}: window carries id {w.target_id}")
            if not w.t0 < w.tf:
                raise InstanceError(f"target {i}: window [{w.t0}, {w.tf}] is empty")
            if w.t0 <= prev_tf:
                raise InstanceError(f"target {i}: windows overlap or are unsorted")
            prev_tf = w.tf
            if w.speed > inst.v_max:
                raise InstanceError(f"target {i}: speed {w.speed} exceeds v_max")
            if not geometry.segment_is_free(w.p0, w.p_end, inst.obstacles):
                raise InstanceError(f"target {i}: window motion enters an obstacle")


@dataclass(frozen=True)
class WindowNode:
    """A target paired with one of its windows; target 0 is the depot.

    ``index`` is the position in ``window_nodes``; a time-reversed copy keeps
    the index of its original and sets ``reversed``.  Position is
    p0 + vel (t - tref).
    """

    target: int
    t0: float
    tf: float
    index: int = 0
    window: int = 0
    p0: Point = Point(0.0, 0.0)
    vel: tuple[float, float] = (0.0, 0.0)
    tref: float = 0.0
    reversed: bool = False

    @property
    def is_depot(self) -> bool:
        return self.target == DEPOT

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.t0) or math.isinf(self.tf)

    def position(self, t: float) -> Point:
        return Point(self.p0[0] + self.vel[0] * (t - self.tref),
                     self.p0[1] + self.vel[1] * (t - self.tref))

    def motion_tuple(self):
        return (self.p0[0], self.p0[1], self.vel[0], self.vel[1], self.tref)

    def segment(self) -> tuple[Point, Point]:
        """Spatial segment swept during the window (a point if stationary/unbounded)."""
        if self.unbounded:
            return self.p0, self.p0
        return self.position(self.t0), self.position(self.tf)

    def motion(self) -> Motion:
        return Motion(self.position(self.t0), self.vel, self.t0, self.tf)

    def label(self) -> str:
        return "depot" if self.is_depot else f"{self.target}.{self.window}"


def targ(s: WindowNode) -> int:
    return s.target


def window_nodes(inst: Instance) -> list[WindowNode]:
    nodes = [WindowNode(DEPOT, 0.0, INF, 0, 0, Point(*inst.depot), (0.0, 0.0), 0.0)]
    for i, wins in enumerate(inst.targets, start=1):
        for j, w in enumerate(wins):
            nodes.append(WindowNode(i, w.t0, w.tf, len(nodes), j, Point(*w.p0),
                                    tuple(w.vel), w.t0))
    return nodes


def target_position(s: WindowNode, t: float, inst: Optional[Instance] = None) -> Point:
    if s.is_depot:
        return Point(*inst.depot) if inst is not None else s.p0
    if not s.t0 <= t <= s.tf:
        raise ValueError(f"time {t} outside window [{s.t0}, {s.tf}] of target {s.target}")
    if t == s.tf and inst is not None:
        return inst.targets[s.target - 1][s.window].p_end
    return s.position(t)


@dataclass(frozen=True)
class Trajectory:
    """Timed polyline; motion is linear between consecutive (t, p) waypoints."""

    waypoints: tuple[tuple[float, Point], ...]

    def __post_init__(self):
        for (ta, _), (tb, _) in zip(self.waypoints, self.waypoints[1:]):
            if tb < ta:
                raise ValueError("waypoint times must be nondecreasing")

    @classmethod
    def at(cls, t: float, p: Sequence[float]) -> "Trajectory":
        return cls(((float(t), Point(*p)),))

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def start_time(self) -> float:
        return self.waypoints[0][0]

    @property
    def end_time(self) -> float:
        return self.waypoints[-1][0]

    @property
    def start_point(self) -> Point:
        return self.waypoints[0][1]

    @property
    def end_point(self) -> Point:
        return self.waypoints[-1][1]

    def legs(self):
        return zip(self.waypoints, self.waypoints[1:])

    def length(self) -> float:
        return sum(math.dist(a[1], b[1]) for a, b in self.legs())

    def position(self, t: float) -> Point:
        w = self.waypoints
        if t <= w[0][0]:
            return w[0][1]
        for (ta, pa), (tb, pb) in self.legs():
            if ta <= t <= tb:
                if tb == ta:
                    return pb
                u = (t - ta) / (tb - ta)
                return Point(pa[0] + u * (pb[0] - pa[0]), pa[1] + u * (pb[1] - pa[1]))
        return w[-1][1]


@dataclass(frozen=True)
class Interception:
    node: WindowNode
    time: float


@dataclass(frozen=True)
class Solution:
    trajectory: Trajectory
    final_time: float
    window_sequence: tuple[Interception, ...] = ()

    @property
    def cost(self) -> float:
        return self.final_time


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "pass"
        return "; ".join(f"{c.name}: {c.detail}" for c in self.failures)


def _closest_approach(ta, pa, tb, pb, w: TargetWindow):
    """Min distance between the agent leg and the target over their common time."""
    lo = max(ta, w.t0)
    hi = min(tb, w.tf)
    if lo > hi:
        return INF, None
    if tb > ta:
        ax = (pb[0] - pa[0]) / (tb - ta)
        ay = (pb[1] - pa[1]) / (tb - ta)
    else:
        ax = ay = 0.0
    # relative position r(t) = r0 + rv (t - lo)
    agent_lo = (pa[0] + ax * (lo - ta), pa[1] + ay * (lo - ta))
    targ_lo = w.position(lo)
    r0 = (agent_lo[0] - targ_lo[0], agent_lo[1] - targ_lo[1])
    rv = (ax - w.vel[0], ay - w.vel[1])
    vv = rv[0] * rv[0] + rv[1] * rv[1]
    u = 0.0
    if vv > 0.0:
        u = min(max(-(r0[0] * rv[0] + r0[1] * rv[1]) / vv, 0.0), hi - lo)
    return math.hypot(r0[0] + rv[0] * u, r0[1] + rv[1] * u), lo + u


def validate_solution(inst: Instance, sol: Solution, tol: float = 1e-6,
                      v_limit: Optional[float] = None) -> ValidationReport:
    """Check a solution against speed, clearance, depot and interception rules.

    ``v_limit`` overrides the speed bound (e.g. a witness moving at beta v_max).
    """
    rep = ValidationReport()
    wp = sol.trajectory.waypoints
    scale = inst.scale()
    vmax = inst.v_max if v_limit is None else v_limit
    slack = 1e-9 * scale
    if not wp:
        rep.checks.append(Check("waypoints", False, "empty trajectory"))
        return rep
    depot_tol = tol * scale
    start_ok = wp[0][0] == 0.0 and math.dist(wp[0][1], inst.depot) <= depot_tol
    rep.checks.append(Check("depot_start", start_ok, "" if start_ok else f"starts at {wp[0]}"))
    end_ok = math.dist(wp[-1][1], inst.depot) <= depot_tol
    rep.checks.append(Check("depot_end", end_ok, "" if end_ok else f"ends at {wp[-1]}"))
    ft_ok = abs(sol.final_time - wp[-1][0]) <= tol * max(1.0, abs(sol.final_time))
    rep.checks.append(Check("final_time", ft_ok,
                            "" if ft_ok else f"{sol.final_time} vs {wp[-1][0]}"))
    bad_speed = []
    bad_clear = []
    for k, ((ta, pa), (tb, pb)) in enumerate(zip(wp, wp[1:])):
        d = math.dist(pa, pb)
        if tb < ta or d > vmax * (1.0 + tol) * (tb - ta) + slack:
            bad_speed.append(k)
        if not geometry.segment_is_free(pa, pb, inst.obstacles):
            bad_clear.append(k)
    for k, (t, p) in enumerate(wp):
        if geometry.point_in_interior(p, inst.obstacles):
            bad_clear.append(f"waypoint {k}")
    rep.checks.append(Check("speed", not bad_speed,
                            f"legs {bad_speed[:5]} exceed the speed limit" if bad_speed else ""))
    rep.checks.append(Check("clearance", not bad_clear,
                            f"legs {bad_clear[:5]} enter obstacles" if bad_clear else ""))
    legs = list(zip(wp, wp[1:])) or [(wp[0], wp[0])]
    reach = tol * scale
    for i, wins in enumerate(inst.targets, start=1):
        best = INF
        for w in wins:
            for (ta, pa), (tb, pb) in legs:
                d, _ = _closest_approach(ta, pa, tb, pb, w)
                best = min(best, d)
            if best <= reach:
                break
        ok = best <= reach
        rep.checks.append(Check(f"intercept_{i}", ok,
                                "" if ok else f"closest approach {best:.3g}"))
    return rep


# JSON I/O

def instance_to_dict(inst: Instance) -> dict:
    d: dict = {"v_max": inst.v_max, "depot": [inst.depot[0], inst.depot[1]]}
    if inst.grid is not None:
        g = inst.grid
        d["grid"] = {"rows": g.rows, "cols": g.cols, "cell_size": g.cell_size,
                     "occupied": [list(rc) for rc in sorted(g.occupied)]}
    else:
        d["polygons"] = [_polygon_to_json(poly) for poly in inst.obstacles.polygons]
    d["targets"] = [
        {"id": i, "windows": [{"t0": w.t0, "tf": w.tf, "p0": list(w.p0), "vel": list(w.vel)}
                              for w in wins]}
        for i, wins in enumerate(inst.targets, start=1)
    ]
    return d


def _pt(v, what) -> Point:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise InstanceError(f"{what} must be a pair of numbers")
    try:
        return Point(float(v[0]), float(v[1]))
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{what} must be numeric") from exc


def _polygon_to_json(poly: geometry.Polygon):
    outer = [list(p) for p in poly.outer]
    if not poly.holes:
        return outer
    return {"outer": outer, "holes": [[list(p) for p in h] for h in poly.holes]}


def _polygon_from_json(raw) -> geometry.Polygon:
    # a bare vertex list, or {"outer": [...], "holes": [[...], ...]}
    if isinstance(raw, dict):
        outer, holes = raw["outer"], raw.get("holes", [])
    else:
        outer, holes = raw, []
    return geometry.Polygon(tuple(_pt(p, "polygon vertex") for p in outer),
                            tuple(tuple(_pt(p, "hole vertex") for p in h) for h in holes))


def instance_from_dict(d: dict, validate: bool = True) -> Instance:
    try:
        v_max = float(d["v_max"])
        depot = _pt(d["depot"], "depot")
        grid = None
        if "grid" in d:
            gd = d["grid"]
            grid = Grid(int(gd["rows"]), int(gd["cols"]), float(gd["cell_size"]),
                        frozenset((int(r), int(c)) for r, c in gd.get("occupied", [])))
            obstacles = grid.obstacles()
        else:
            obstacles = ObstacleSet.from_polygons(
                [_polygon_from_json(poly) for poly in d.get("polygons", [])])
        raw = sorted(d.get("targets", []), key=lambda t: int(t["id"]))
        targets = []
        for k, td in enumerate(raw, start=1):
            if int(td["id"]) != k:
                raise InstanceError("target ids must be 1..N without gaps")
            wins = sorted(
                (TargetWindow(k, float(w["t0"]), float(w["tf"]), _pt(w["p0"], "p0"),
                              tuple(_pt(w["vel"], "vel")))
                 for w in td["windows"]),
                key=lambda w: w.t0)
            targets.append(tuple(wins))
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError, geometry.GridError) as exc:
        raise InstanceError(f"malformed instance: {exc}") from exc
    inst = Instance(obstacles, depot, v_max, tuple(targets), grid)
    if validate:
        validate_instance(inst)
    return inst


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError("instance JSON must be an object")
    return instance_from_dict(data)


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def save_instance(inst: Instance, path) -> None:
    dump_json(instance_to_dict(inst), path)


def solution_to_dict(sol: Solution) -> dict:
    return {
        "final_time": sol.final_time,
        "waypoints": [[t, p[0], p[1]] for t, p in sol.trajectory.waypoints],
        "interceptions": [{"target": ic.node.target, "window_index": ic.node.window,
                           "time": ic.time} for ic in sol.window_sequence],
    }


def solution_from_dict(d: dict, inst: Optional[Instance] = None) -> Solution:
    try:
        wp = tuple((float(t), Point(float(x), float(y))) for t, x, y in d["waypoints"])
        nodes = {(n.target, n.window): n for n in window_nodes(inst)} if inst else {}
        seq = []
        for ic in d.get("interceptions", []):
            key = (int(ic["target"]), int(ic["window_index"]))
            node = nodes.get(key) or WindowNode(key[0], -INF, INF, -1, key[1])
            seq.append(Interception(node, float(ic["time"])))
        return Solution(Trajectory(wp), float(d["final_time"]), tuple(seq))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed solution: {exc}") from exc


def load_solution(path, inst: Optional[Instance] = None) -> Solution:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read solution {path}: {exc}") from exc
    return solution_from_dict(data, inst)


def save_solution(sol: Solution, path) -> None:
    dump_json(solution_to_dict(sol), path)
