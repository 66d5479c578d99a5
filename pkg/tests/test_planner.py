import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instance, obstacles
from mttspo import generator, tour_search
from mttspo.geometry import IntervalSet, Point
from mttspo.model import INF, InstanceError, validate_solution, window_nodes
from mttspo.planner import (construct_mtvg, edge_cost_to_goal, heuristic, latest_departure, lfdt,
                            point_to_moving_target_search, reverse_node, search_mtvg, sft)
from oracles import World


def _setup(inst):
    prep = tour_search.prepare(inst, with_gtw=False)
    return prep.nodes, prep.graph, prep.table


def _node(targets, i=1, **kw):
    inst = instance(targets, **kw)
    return window_nodes(inst)[i]


def test_sft_examples():
    s = _node([[(0, 10, (3, 4))]])
    assert sft((0, 0), 0.0, s, (0, 10), 1.0) == 5.0
    s = _node([[(2, 5, (1, 1))]])
    assert sft((1, 1), 0.0, s, (2, 5), 1.0) == 2.0
    s = _node([[(0, 10, (3, 0), (1, 0))]])
    assert sft((0, 0), 0.0, s, (0, 10), 2.0) == pytest.approx(3.0, abs=1e-12)
    # sampled oracle for the same case
    ts = np.arange(0, 10, 1e-5)
    ok = np.abs(3 + ts) <= 2 * ts
    assert ts[ok][0] == pytest.approx(3.0, abs=1e-5)


def test_sft_unreachable_interval():
    s = _node([[(0, 10, (8, 0))]])
    assert sft((0, 0), 0.0, s, (0, 3), 1.0) == INF


def test_edge_cost_examples():
    s = _node([[(0, 10, (5, 0))]])
    assert edge_cost_to_goal((0, 0), s, 0.0, IntervalSet(), 1.0) == INF
    assert edge_cost_to_goal((0, 0), s, 0.0, IntervalSet([(0, 10)]), 1.0) == \
        sft((0, 0), 0.0, s, (0, 10), 1.0)
    assert edge_cost_to_goal((0, 0), s, 0.0, IntervalSet([(0, 3), (7, 9)]), 1.0) == 7.0


def test_heuristic_examples():
    s = _node([[(0, 6, (3, 4), (0, 1))]])
    assert heuristic((0, 0), s, 1.0) == 5.0
    assert heuristic((3, 6), s, 1.0) == 0.0


def test_construct_mtvg_variants():
    inst = instance([[(0, 100, (3, 0))]], obs=obstacles((1, -1, 2, 1)))
    nodes, g, tbl = _setup(inst)
    m = construct_mtvg(inst.depot, 0.0, nodes[1], g, tbl)
    assert m.start_id == g.depot_id and m.start_edges is None
    p = (0.5, 2.0)
    m = construct_mtvg(p, 0.0, nodes[1], g, tbl)
    world = World.from_obstacles(inst.obstacles)
    want = [i for i in range(g.n) if world.segment_free(p, g.points[i])]
    assert [i for i, _ in m.start_edges] == want
    with pytest.raises(InstanceError):
        construct_mtvg((1.5, 0.0), 0.0, nodes[1], g, tbl)


def test_goal_without_visible_nodes_is_infeasible():
    # target hidden inside a ring of cells, never visible from outside
    from mttspo.geometry import Grid
    cells = {(r, c) for r in range(3) for c in range(3)} - {(1, 1)}
    grid = Grid(3, 3, 1.0, frozenset(cells))
    inst = instance([[(0, 50, (1.5, 1.5))]], depot=(-1, -1), obs=grid.obstacles())
    nodes, g, tbl = _setup(inst)
    m = construct_mtvg(inst.depot, 0.0, nodes[1], g, tbl)
    assert not any(m.goal_edges().get(q) for q in range(g.n) if q != g.end_ids[1])
    assert not search_mtvg(m, 0.0).feasible


def test_obstacle_free_single_goal_edge():
    inst = instance([[(0, 20, (6, 8), (-0.1, 0))]])
    nodes, g, tbl = _setup(inst)
    res = point_to_moving_target_search(inst.depot, 1.0, nodes[1], g, tbl)
    assert res.arrival == pytest.approx(1.0 + sft((0, 0), 1.0, nodes[1], (0, 20), 1.0))
    assert len(res.trajectory) == 2


def test_corner_detour():
    inst = instance([[(0, 100, (3, 0))]], obs=obstacles((1, -1, 2, 1)))
    nodes, g, tbl = _setup(inst)
    res = point_to_moving_target_search(inst.depot, 0.0, nodes[1], g, tbl)
    # (0,0) -> (1,1) -> (2,1) -> (3,0); the direct (1,1) -> (3,0) leg cuts the square
    assert res.arrival == pytest.approx(1 + 2 * math.sqrt(2), abs=1e-12)
    assert [tuple(p) for _, p in res.trajectory.waypoints] in (
        [(0, 0), (1, 1), (2, 1), (3, 0)], [(0, 0), (1, -1), (2, -1), (3, 0)])


def test_expired_window_search_is_bounded():
    inst = instance([[(0, 1, (10, 0))]], obs=obstacles((4, 1, 5, 2), (6, -3, 7, -2)))
    nodes, g, tbl = _setup(inst)
    trace = []
    res = point_to_moving_target_search(inst.depot, 0.0, nodes[1], g, tbl, trace=trace)
    assert not res.feasible and res.arrival == INF
    assert all(gv <= nodes[1].tf for _, gv, _, _ in trace)
    assert res.expansions <= g.n + 1


def test_trace_expands_each_node_once():
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=3, seed=9))
    nodes, g, tbl = _setup(inst)
    for s in nodes[1:]:
        trace = []
        res = point_to_moving_target_search((inst.depot[0], inst.depot[1]), 0.0, s, g, tbl,
                                            trace=trace)
        seen = [row[0] for row in trace]
        assert len(seen) == len(set(seen)) == res.expansions
        fs = [row[2] for row in trace]
        assert fs == sorted(fs)  # consistent heuristic: f never decreases


def test_trajectories_validate_leg_checks():
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=4, seed=3))
    nodes, g, tbl = _setup(inst)
    for s in nodes[1:]:
        res = point_to_moving_target_search(inst.depot, 0.0, s, g, tbl)
        if not res.feasible:
            continue
        wp = res.trajectory.waypoints
        for (ta, pa), (tb, pb) in zip(wp, wp[1:]):
            assert math.dist(pa, pb) <= inst.v_max * (tb - ta) * (1 + 1e-9) + 1e-12
        assert math.dist(wp[-1][1], s.position(res.arrival)) < 1e-9


def test_lfdt_examples():
    inst = instance([[(0, 10, (2, 2))], [(5, 20, (2, 2))]], depot=(2, 2))
    nodes, g, tbl = _setup(inst)
    assert lfdt(nodes[1], nodes[2], g, tbl) == 10.0
    inst = instance([[(0, 10, (0, 0))], [(0, 12, (4, 0))]], depot=(0, 5))
    nodes, g, tbl = _setup(inst)
    assert lfdt(nodes[1], nodes[2], g, tbl) == pytest.approx(8.0, abs=1e-12)
    # departure scan oracle: coarse over the window, fine near the answer
    scan = np.concatenate([np.arange(0, 10, 0.1), np.arange(7.9, 8.1, 1e-4)])
    ok = [t for t in scan
          if point_to_moving_target_search((0, 0), t, nodes[2], g, tbl).arrival <= 12.0]
    assert max(ok) == pytest.approx(8.0, abs=2e-4)
    inst = instance([[(0, 1, (0, 0))], [(2, 3, (100, 0))]])
    nodes, g, tbl = _setup(inst)
    assert lfdt(nodes[1], nodes[2], g, tbl) == -INF


def test_lfdt_to_depot_convention():
    inst = instance([[(0, 7, (3, 0))]], obs=obstacles((1, -1, 2, 1)))
    nodes, g, tbl = _setup(inst)
    assert lfdt(nodes[1], nodes[0], g, tbl) == 7.0


def test_reverse_node_is_an_involution():
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=3, seed=5))
    nodes, g, tbl = _setup(inst)
    for s in nodes:
        r = reverse_node(s)
        assert (r.t0, r.tf) == (-s.tf, -s.t0)
        rr = reverse_node(r)
        assert (rr.target, rr.t0, rr.tf, rr.reversed) == (s.target, s.t0, s.tf, s.reversed)
        if not s.unbounded:
            for t in (s.t0, 0.5 * (s.t0 + s.tf), s.tf):
                assert math.dist(r.position(-t), s.position(t)) <= 1e-9
                assert math.dist(rr.position(t), s.position(t)) <= 1e-9
        if s.is_depot:
            continue
        a = point_to_moving_target_search(inst.depot, 0.0, s, g, tbl)
        b = point_to_moving_target_search(inst.depot, 0.0, rr, g, tbl)
        assert a.arrival == pytest.approx(b.arrival, abs=1e-9) or a.arrival == b.arrival


def test_latest_departure_against_forward_search():
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=3, seed=12))
    nodes, g, tbl = _setup(inst)
    depot = nodes[0]
    for u in nodes[1:]:
        L = latest_departure(u, inst.depot, u.tf + 15.0, g, tbl)
        if L == -INF:
            continue
        res = point_to_moving_target_search(u.position(L), L, depot, g, tbl)
        assert res.feasible and res.arrival <= u.tf + 15.0 + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_departing_later_never_arrives_earlier(t1, dt, qx, qy, speed, heading):
    s = _node([[(0, 30, (2, 1), (speed * math.cos(heading), speed * math.sin(heading)))]])
    ivs = IntervalSet([(0, 4), (6, 9), (12, 30)])
    t2 = t1 + dt
    a1 = t1 + edge_cost_to_goal((qx, qy), s, t1, ivs, 1.0)
    a2 = t2 + edge_cost_to_goal((qx, qy), s, t2, ivs, 1.0)
    assert a1 <= a2 + 1e-9 or a1 == a2
