"""Usable intervals and usable fractions as a measure of instance difficulty.

A time t in target i's windows is usable when some feasible tour intercepts i
at t.  For a fixed window-node sequence the usable times of each entry form
one interval [earliest, latest]: earliest from chaining forward searches,
latest from chaining latest-departure searches backward from the final
window's end.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

from .geometry import Interval, IntervalSet
from .model import INF, Instance, WindowNode
from .planner import latest_departure, point_to_moving_target_search
from .tour_search import Prepared, prepare
from .window_graph import max_lfdt_to_target

DEFAULT_CAP = 10


class CapabilityError(RuntimeError):
    pass


class InfeasibleInstanceError(ValueError):
    pass


@dataclass
class UsableReport:
    intervals: list[IntervalSet]  # per target (index 0 is target 1)
    fractions: list[float]
    min_fraction: float
    binding_return: bool = False  # the depot-return requirement removed some interval

    def as_dict(self) -> dict:
        return {
            "targets": [
                {"target": i + 1, "fraction": f,
                 "intervals": [[iv.lo, iv.hi] for iv in ivs]}
                for i, (ivs, f) in enumerate(zip(self.intervals, self.fractions))
            ],
            "min_fraction": self.min_fraction,
            "binding_return": self.binding_return,
        }


def _check_cap(inst: Instance, cap: int) -> None:
    if inst.n_targets > cap:
        raise CapabilityError(f"{inst.n_targets} targets exceeds the cap of {cap}")


def _prep(inst: Instance, prep: Optional[Prepared]) -> Prepared:
    return prep if prep is not None and prep.gtw is not None else prepare(inst)


def enumerate_feasible_sequences(inst: Instance, prep: Optional[Prepared] = None,
                                 cap: int = DEFAULT_CAP) -> list[tuple[WindowNode, ...]]:
    """Every window-node sequence (depot first and last) that admits a feasible tour."""
    _check_cap(inst, cap)
    prep = _prep(inst, prep)
    g, tbl, gtw = prep.graph, prep.table, prep.gtw
    depot = prep.nodes[0]
    n = inst.n_targets
    out = []

    def rec(seq, p, T):
        s = seq[-1]
        if len(seq) == n + 1:
            if (gtw.has_edge(s, depot)
                    and point_to_moving_target_search(p, T, depot, g, tbl).feasible):
                out.append(seq + (depot,))
            return
        seen = {v.target for v in seq}
        for v in gtw.successors(s):
            if v.is_depot or v.target in seen or T > gtw.label(s, v):
                continue
            res = point_to_moving_target_search(p, T, v, g, tbl)
            if res.feasible:
                rec(seq + (v,), res.trajectory.end_point, res.arrival)

    if n == 0:
        return [(depot, depot)]
    rec((depot,), inst.depot, 0.0)
    return out


def sequence_usable_intervals(seq, inst: Instance, prep: Optional[Prepared] = None
                              ) -> list[Interval]:
    """[earliest, latest] interception time of each non-depot entry of ``seq``."""
    prep = prep if prep is not None else prepare(inst, with_gtw=False)
    g, tbl = prep.graph, prep.table
    body = [s for s in seq if not s.is_depot]
    if not body:
        return []
    early = []
    p, T = inst.depot, 0.0
    for s in body:
        res = point_to_moving_target_search(p, T, s, g, tbl)
        if not res.feasible:
            raise InfeasibleInstanceError(f"sequence infeasible at {s.label()}")
        early.append(res.arrival)
        p, T = res.trajectory.end_point, res.arrival
    if not point_to_moving_target_search(p, T, prep.nodes[0], g, tbl).feasible:
        raise InfeasibleInstanceError("sequence cannot return to the depot")
    late = [0.0] * len(body)
    late[-1] = body[-1].tf
    for k in range(len(body) - 1, 0, -1):
        nxt = body[k]
        late[k - 1] = latest_departure(body[k - 1], nxt.position(late[k]), late[k], g, tbl)
    return [Interval(e, l) for e, l in zip(early, late)]


def _report(inst: Instance, per_target: list[list], binding: bool = False) -> UsableReport:
    sets = [IntervalSet(ivs) for ivs in per_target]
    fractions = []
    for wins, ivs in zip(inst.targets, sets):
        total = sum(w.tf - w.t0 for w in wins)
        fractions.append(min(1.0, ivs.total_length() / total) if total > 0 else 1.0)
    return UsableReport(sets, fractions, min(fractions) if fractions else 1.0, binding)


def usable_fraction_by_enumeration(inst: Instance, prep: Optional[Prepared] = None,
                                   cap: int = DEFAULT_CAP) -> UsableReport:
    """Union of sequence-specific usable intervals over all feasible sequences."""
    prep = _prep(inst, prep)
    seqs = enumerate_feasible_sequences(inst, prep, cap)
    if not seqs:
        raise InfeasibleInstanceError("instance has no feasible tour")
    per_target: list[list] = [[] for _ in range(inst.n_targets)]
    for seq in seqs:
        body = [s for s in seq if not s.is_depot]
        for s, iv in zip(body, sequence_usable_intervals(seq, inst, prep)):
            if iv.lo <= iv.hi:
                per_target[s.target - 1].append(iv)
    return _report(inst, per_target)


def usable_fraction(inst: Instance, prep: Optional[Prepared] = None,
                    cap: int = DEFAULT_CAP) -> UsableReport:
    """Usable intervals per target via prefix/suffix dynamic programming.

    Earliest arrival at a window-node depends only on the prefix; among
    prefixes that visit the same targets and end at the same node the
    earliest one dominates (the agent can shadow the target from there).
    Likewise the latest usable time depends only on the suffix and the latest
    one dominates.  The union over sequences is therefore the union over
    (visited set, node) of [min earliest, max latest].  This matches the
    per-sequence union exactly while evaluating each state once.
    """
    _check_cap(inst, cap)
    prep = _prep(inst, prep)
    g, tbl, gtw = prep.graph, prep.table, prep.gtw
    n = inst.n_targets
    if n == 0:
        return UsableReport([], [], 1.0)
    depot = prep.nodes[0]
    nodes = prep.nodes[1:]
    full = (1 << n) - 1

    def bit(s):
        return 1 << (s.target - 1)

    # forward: (mask, node index) -> (earliest time, interception point)
    fwd: dict = {}
    for s in nodes:
        if gtw.label(depot, s) >= 0.0:
            res = point_to_moving_target_search(inst.depot, 0.0, s, g, tbl)
            if res.feasible:
                fwd[(bit(s), s.index)] = (res.arrival, res.trajectory.end_point)
    frontier = sorted(fwd)
    while frontier:
        nxt = {}
        for mask, k in frontier:
            T, p = fwd[(mask, k)]
            s = prep.nodes[k]
            seq_targets = {i + 1 for i in range(n) if mask >> i & 1}
            for v in gtw.successors(s):
                if v.is_depot or mask & bit(v) or T > gtw.label(s, v):
                    continue
                key = (mask | bit(v), v.index)
                res = point_to_moving_target_search(p, T, v, g, tbl)
                if not res.feasible:
                    continue
                # drop states that can no longer reach some unvisited target
                rest = set(range(1, n + 1)) - seq_targets - {v.target}
                if any(res.arrival > max_lfdt_to_target(gtw, v, i) for i in rest):
                    continue
                if key not in nxt or res.arrival < nxt[key][0]:
                    nxt[key] = (res.arrival, res.trajectory.end_point)
        fwd.update(nxt)
        frontier = sorted(nxt)
    # backward: (mask of suffix targets incl. the node's, node index) -> latest time
    bwd: dict = {}
    binding = False
    for s in nodes:
        if gtw.has_edge(s, depot):
            bwd[(bit(s), s.index)] = s.tf
        else:
            binding = True
    frontier = sorted(bwd)
    while frontier:
        nxt = {}
        for mask, k in frontier:
            L = bwd[(mask, k)]
            s = prep.nodes[k]
            goal = s.position(L)
            for u in nodes:
                if mask & bit(u) or not gtw.has_edge(u, s):
                    continue
                val = latest_departure(u, goal, L, g, tbl)
                if val == -INF:
                    continue
                key = (mask | bit(u), u.index)
                if key not in nxt or val > nxt[key]:
                    nxt[key] = val
        bwd.update(nxt)
        frontier = sorted(nxt)
    per_target: list[list] = [[] for _ in range(n)]
    feasible = False
    for (mask, k), (E, _) in fwd.items():
        s = prep.nodes[k]
        L = bwd.get(((full ^ mask) | bit(s), k))
        if L is not None and E <= L:
            per_target[s.target - 1].append((E, L))
            feasible = True
    if not feasible:
        raise InfeasibleInstanceError("instance has no feasible tour")
    return _report(inst, per_target, binding)


def write_report(rep: UsableReport, json_path=None, csv_prefix=None) -> None:
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(rep.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if csv_prefix is not None:
        with open(f"{csv_prefix}_intervals.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["target", "interval_lo", "interval_hi"])
            for i, ivs in enumerate(rep.intervals, start=1):
                for iv in ivs:
                    w.writerow([i, repr(iv.lo), repr(iv.hi)])
        with open(f"{csv_prefix}_fractions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["target", "fraction"])
            for i, f in enumerate(rep.fractions, start=1):
                w.writerow([i, repr(f)])
            w.writerow(["min_fraction", repr(rep.min_fraction)])
