"""Directed graph over window-nodes labelled with latest feasible departure times."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Optional

from .model import INF, Instance, WindowNode
from .planner import lfdt
from .visgraph import VisibilityGraph, VisibleIntervalTable


class BudgetExceeded(RuntimeError):
    pass


@dataclass(eq=False)
class TimeWindowGraph:
    nodes: list[WindowNode]
    n_targets: int
    labels: dict = field(default_factory=dict)  # (u.index, v.index) -> lfdt
    out: list = field(default_factory=list)  # per node: sorted successor indices
    best_to_target: list = field(default_factory=list)  # per node: {target: max label}

    def has_edge(self, u, v) -> bool:
        return (_idx(u), _idx(v)) in self.labels

    def label(self, u, v) -> float:
        return self.labels.get((_idx(u), _idx(v)), -INF)

    def successors(self, u) -> list[WindowNode]:
        return [self.nodes[k] for k in self.out[_idx(u)]]

    def edge_count(self) -> int:
        return len(self.labels)


def _idx(s) -> int:
    return s.index if isinstance(s, WindowNode) else int(s)


def build_time_window_graph(inst: Instance, g: VisibilityGraph, tbl: VisibleIntervalTable,
                            nodes: Optional[list[WindowNode]] = None,
                            deadline: Optional[float] = None) -> TimeWindowGraph:
    """Evaluate every ordered pair of window-nodes of different targets.

    ``deadline`` is a perf_counter value; BudgetExceeded is raised past it.
    """
    if nodes is None:
        nodes = tbl.nodes
    gtw = TimeWindowGraph(nodes, inst.n_targets)
    for u in nodes:
        succ = []
        best: dict[int, float] = {}
        for v in nodes:
            if u.target == v.target:
                continue
            if deadline is not None and time.perf_counter() > deadline:
                raise BudgetExceeded("time window graph construction")
            lab = lfdt(u, v, g, tbl, inst)
            if lab > -INF:
                gtw.labels[(u.index, v.index)] = lab
                succ.append(v.index)
                if lab > best.get(v.target, -INF):
                    best[v.target] = lab
        gtw.out.append(succ)
        gtw.best_to_target.append(best)
    return gtw


def max_lfdt_to_target(gtw: TimeWindowGraph, frm, target: int) -> float:
    return gtw.best_to_target[_idx(frm)].get(target, -INF)


def write_lfdt_csv(gtw: TimeWindowGraph, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "lfdt"])
        for (u, v), lab in sorted(gtw.labels.items()):
            w.writerow([gtw.nodes[u].label(), gtw.nodes[v].label(), repr(lab)])
