import math

import numpy as np
import pytest

from conftest import instance, obstacles
from mttspo import tour_search
from mttspo.geometry import segment_is_free
from mttspo.model import INF, Trajectory, validate_solution, window_nodes
from mttspo.planner import point_to_moving_target_search
from mttspo.tour_search import (Status, TreeNode, check_tree_node, concatenate, lookahead, solve,
                                successor_window_nodes)
from oracles import enumerate_orders


def test_zero_targets():
    inst = instance([], depot=(2, 3))
    res = solve(inst)
    assert res.status is Status.FEASIBLE
    assert res.solution.cost == 0.0
    assert list(res.solution.trajectory.waypoints) == [(0.0, (2.0, 3.0))]


def test_colocated_target():
    inst = instance([[(0, 5, (1, 1))]], depot=(1, 1))
    res = solve(inst)
    assert res.feasible and res.solution.cost == 0.0
    assert validate_solution(inst, res.solution).ok


def test_successors_depot_only_when_done():
    inst = instance([[(0, 10, (1, 0))], [(0, 10, (0, 1))]])
    prep = tour_search.prepare(inst)
    n = prep.nodes
    traj = Trajectory.at(0.0, (0.0, 0.0))
    done = TreeNode((n[0], n[1], n[2]), traj, 0.0, 0b110)
    assert successor_window_nodes(done, prep.gtw) == [n[0]]
    half = TreeNode((n[0], n[1]), traj, 0.0, 0b010)
    assert successor_window_nodes(half, prep.gtw) == [n[2]]
    late = TreeNode((n[0], n[1]), traj, 50.0, 0b010)
    assert successor_window_nodes(late, prep.gtw) == []


def test_successors_match_brute_force():
    inst = instance([[(0, 4, (2, 0)), (8, 12, (2, 0))], [(0, 20, (0, 3), (0.1, 0))],
                     [(3, 6, (-2, -2))]], obs=obstacles((0.5, 0.5, 1.5, 1.5)))
    prep = tour_search.prepare(inst)
    gtw, nodes = prep.gtw, prep.nodes
    traj = Trajectory.at(0.0, (0.0, 0.0))
    for last in nodes:
        for visited in range(0, 16, 2):
            if last.target and not visited >> last.target & 1:
                continue
            for T in (0.0, 3.0, 7.5, 11.0):
                node = TreeNode((nodes[0], last) if last.target else (last,), traj, T, visited)
                want = []
                for v in nodes:
                    lab = gtw.label(last, v)
                    if lab == -INF or T > lab:
                        continue
                    if v.is_depot and visited != 0b1110:
                        continue
                    if not v.is_depot and visited >> v.target & 1:
                        continue
                    want.append(v)
                assert sorted(successor_window_nodes(node, gtw), key=lambda s: s.index) == want


def test_lookahead_examples():
    inst = instance([[(0, 10, (4, 0))], [(0, 12, (0, 4))]])
    prep = tour_search.prepare(inst)
    n, gtw = prep.nodes, prep.gtw
    assert lookahead((n[0], n[1], n[2]), 100.0, gtw)
    far = instance([[(0, 10, (4, 0))], [(0, 1, (100, 0))]])
    fp = tour_search.prepare(far)
    assert not lookahead((fp.nodes[0], fp.nodes[1]), 4.0, fp.gtw)


def test_lookahead_borderline_is_feasible():
    # target 2 sits 4 m from target 1 and closes at 12, so max LFDT from 1 to 2 is 8
    inst = instance([[(0, 10, (0, 0))], [(0, 12, (4, 0))]], depot=(0, 0))
    prep = tour_search.prepare(inst)
    n, gtw = prep.nodes, prep.gtw
    lab = gtw.label(n[1], n[2])
    assert lab == 8.0
    assert lookahead((n[0], n[1]), lab, gtw)
    assert not lookahead((n[0], n[1]), math.nextafter(lab, INF), gtw)
    # and a completing trajectory exists from that state
    node = TreeNode((n[0], n[1]), Trajectory([(0.0, (0.0, 0.0)), (lab, (0.0, 0.0))]), lab,
                    0b010, (lab,))
    assert n[2] in successor_window_nodes(node, gtw)
    res = point_to_moving_target_search((0, 0), lab, n[2], prep.graph, prep.table)
    assert res.feasible and res.arrival <= 12.0


def test_concatenate():
    a = Trajectory([(0.0, (0.0, 0.0)), (1.0, (1.0, 0.0))])
    assert concatenate(a, Trajectory([])) is a
    b = Trajectory([(1.0, (1.0, 0.0)), (2.0, (1.0, 1.0))])
    c = concatenate(a, b)
    assert list(c.waypoints) == [(0.0, (0.0, 0.0)), (1.0, (1.0, 0.0)), (2.0, (1.0, 1.0))]
    with pytest.raises(ValueError):
        concatenate(a, Trajectory([(1.5, (1.0, 0.0)), (2.0, (1.0, 1.0))]))


def test_infeasible_disjoint_far_targets():
    inst = instance([[(0, 1, (1, 0))], [(0, 2, (50, 0))]])
    res = solve(inst)
    assert res.status is Status.INFEASIBLE
    assert enumerate_orders(inst, tour_search.prepare(inst, with_gtw=False)) is None


def test_timeout_status():
    inst = instance([[(0, 10, (1, 0))], [(0, 10, (0, 1))]])
    assert solve(inst, budget=0.0).status is Status.TIMEOUT


def _random_instance(rng):
    n = int(rng.integers(1, 5))
    obs = obstacles((1, -1, 2, 1), (-2, 1.5, -1, 3))
    targets = []
    for _ in range(n):
        wins = []
        t = 0.0
        for _ in range(int(rng.integers(1, 3))):
            t0 = t + rng.uniform(0, 6)
            tf = t0 + rng.uniform(0.5, 5)
            while True:
                p = rng.uniform(-4, 4, 2)
                sp = rng.uniform(0, 0.5)
                ang = rng.uniform(0, 2 * math.pi)
                vel = (sp * math.cos(ang), sp * math.sin(ang))
                end = p + np.array(vel) * (tf - t0)
                if segment_is_free(tuple(p), tuple(end), obs):
                    break
            wins.append((t0, tf, tuple(p), vel))
            t = tf
        targets.append(wins)
    return instance(targets, obs=obs)


def test_dfs_matches_enumeration():
    rng = np.random.default_rng(7)
    seen = {True: 0, False: 0}
    for _ in range(25):
        inst = _random_instance(rng)
        prep_list = []
        res = solve(inst, prep_out=prep_list)
        oracle = enumerate_orders(inst, prep_list[0])
        assert res.feasible == (oracle is not None)
        seen[res.feasible] += 1
        if res.feasible:
            assert validate_solution(inst, res.solution).ok
    assert seen[True] and seen[False]


def test_deterministic_and_lookahead_neutral():
    rng = np.random.default_rng(3)
    for _ in range(8):
        inst = _random_instance(rng)
        a = solve(inst, timing=False)
        b = solve(inst, timing=False)
        assert a.status == b.status
        assert a.stats.as_dict() == b.stats.as_dict()
        if a.feasible:
            assert a.solution.trajectory.waypoints == b.solution.trajectory.waypoints
        c = solve(inst, use_lookahead=False, timing=False)
        assert c.status == a.status
        assert a.stats.nodes_popped <= c.stats.nodes_popped


def test_popped_nodes_satisfy_invariants(monkeypatch):
    rng = np.random.default_rng(5)
    inst = _random_instance(rng)
    seen = []
    orig = successor_window_nodes

    def spy(node, gtw):
        seen.append(node)
        return orig(node, gtw)

    monkeypatch.setattr(tour_search, "successor_window_nodes", spy)
    solve(inst)
    assert seen
    for node in seen:
        assert check_tree_node(inst, node) == []


def test_prefix_sequences_are_window_nodes():
    inst = instance([[(0, 10, (1, 0))], [(0, 10, (0, 1))], [(0, 10, (1, 1))]])
    res = solve(inst)
    got = [ic.node.target for ic in res.solution.window_sequence]
    assert sorted(got) == [1, 2, 3]
    times = [ic.time for ic in res.solution.window_sequence]
    assert times == sorted(times)
    assert len(window_nodes(inst)) == 4
