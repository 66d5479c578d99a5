import itertools
import math

import numpy as np
import pytest

from conftest import instance, obstacles
from mttspo import generator
from mttspo.baseline import (CapabilityError, baseline_solve, pairwise_transfers, sample_points,
                             solve_gtsp_feasibility)
from mttspo.geometry import Grid
from mttspo.model import validate_solution
from mttspo.tour_search import Status
from oracles import LatticeOracle


def test_sample_points_examples():
    inst = instance([[(0, 10, (1, 0))]])
    assert [p.t for p in sample_points(inst, 1)] == [0.0]
    inst = instance([[(0, 2, (1, 0)), (8, 10, (1, 0))]])
    pts = sample_points(inst, 3)
    assert [p.t for p in pts] == [0.0, 2.0, 10.0]
    assert [p.window_index for p in pts] == [0, 0, 1]
    inst = instance([[(0, 5, (1, 0))], [(0, 5, (2, 0))], [(1, 3, (3, 0))]])
    assert len(sample_points(inst, 10)) == 30
    with pytest.raises(ValueError):
        sample_points(inst, 0)


def test_sample_points_on_motion():
    inst = instance([[(2, 6, (1, 0), (0.5, 0.25)), (9, 11, (0, 0), (-0.1, 0))]])
    for sp in sample_points(inst, 7):
        w = inst.targets[0][sp.window_index]
        assert w.t0 <= sp.t <= w.tf
        assert sp.p == w.position(sp.t)


def test_coincident_samples_separated():
    inst = instance([[(0, 4, (1, 1))], [(0, 4, (1, 1))]])
    pts = sample_points(inst, 2)
    keys = {(sp.t, sp.p) for sp in pts}
    assert len(keys) == len(pts)


def test_transfer_examples():
    inst = instance([[(0, 10, (1, 0))], [(3, 10, (1, 0))], [(0, 5, (11, 0))]])
    pts = sample_points(inst, 1)  # t = 0, 3, 0
    tbl = pairwise_transfers(pts, inst)
    assert tbl.feasible(0, 1)
    assert tbl.slack(0, 1) == pytest.approx(3.0)
    assert not tbl.feasible(1, 0)
    assert not tbl.feasible(0, 2)
    assert tbl.feasible(2, len(pts))


def test_transfer_around_obstacles_vs_lattice():
    grid = Grid(6, 6, 1.0, frozenset({(2, 2), (2, 3), (3, 2), (1, 4), (4, 1)}))
    obs = grid.obstacles()
    ends = [(0.5, 0.5), (5.5, 5.5), (0.5, 5.5), (5.5, 0.25), (2.0, 1.0)]
    inst = instance([[(20 * k, 20 * k + 1, p)] for k, p in enumerate(ends)], depot=(3.0, 5.0),
                    obs=obs, grid=grid)
    pts = sample_points(inst, 1)
    tbl = pairwise_transfers(pts, inst)
    lat = LatticeOracle(grid, sub=8)
    coords = [sp.p for sp in pts] + [inst.depot]
    for a, b in itertools.combinations(range(len(coords)), 2):
        d = lat.distances(lat.node_at(coords[a]))[lat.node_at(coords[b])]
        assert tbl.dist[a, b] <= d + 1e-9
        assert tbl.dist[a, b] >= d / 1.02
        # the stored route realizes the distance
        route = tbl.path(a, b)
        assert sum(math.dist(u, v) for u, v in zip(route, route[1:])) == \
            pytest.approx(tbl.dist[a, b], rel=1e-12)


def _brute_force(tbl, n_clusters):
    depot = len(tbl.points)
    by = [[k for k, sp in enumerate(tbl.points) if sp.target_id == c + 1]
          for c in range(n_clusters)]
    for order in itertools.permutations(range(n_clusters)):
        for pick in itertools.product(*(by[c] for c in order)):
            stops = [depot, *pick, depot]
            if all(tbl.feasible(a, b) for a, b in zip(stops, stops[1:])):
                return list(pick)
    return None


def _check_seq(tbl, seq, n_clusters):
    depot = len(tbl.points)
    stops = [depot, *seq, depot]
    assert sorted(tbl.points[k].target_id for k in seq) == list(range(1, n_clusters + 1))
    assert all(tbl.feasible(a, b) for a, b in zip(stops, stops[1:]))


def test_gtsp_matches_brute_force():
    rng = np.random.default_rng(1)
    found = {True: 0, False: 0}
    for _ in range(40):
        n = int(rng.integers(1, 5))
        targets = []
        for _ in range(n):
            t0 = rng.uniform(0, 8)
            targets.append([(t0, t0 + rng.uniform(0.5, 4), tuple(rng.uniform(-3, 3, 2)))])
        inst = instance(targets, obs=obstacles((-0.5, -0.5, 0.5, 0.5)),
                        depot=(-2.5, -2.5))
        tbl = pairwise_transfers(sample_points(inst, 3), inst)
        got = solve_gtsp_feasibility(tbl, n)
        want = _brute_force(tbl, n)
        assert (got is None) == (want is None)
        found[got is not None] += 1
        if got is not None:
            _check_seq(tbl, got, n)
    assert found[True] and found[False]


def test_gtsp_trivial_cases():
    inst = instance([[(5, 10, (1, 0))]])
    tbl = pairwise_transfers(sample_points(inst, 1), inst)
    assert solve_gtsp_feasibility(tbl, 1) == [0]
    inst = instance([[(0, 10, (1, 0))], [(0, 1, (40, 0))]])
    tbl = pairwise_transfers(sample_points(inst, 3), inst)
    assert solve_gtsp_feasibility(tbl, 2) is None
    with pytest.raises(CapabilityError):
        solve_gtsp_feasibility(tbl, 13)


def test_easy_instance_first_attempt():
    inst = instance([[(0, 20, (1, 0))], [(0, 20, (0, 2))], [(0, 20, (-1, -1))]])
    res = baseline_solve(inst)
    assert res.status is Status.FEASIBLE
    assert [a.n_per_target for a in res.attempts] == [10]
    assert validate_solution(inst, res.solution).ok


def test_budget_exhausted():
    inst = instance([[(0, 20, (1, 0))]])
    res = baseline_solve(inst, budget=0.0)
    assert res.status is Status.TIMEOUT
    res = baseline_solve(instance([[(0, 1, (1, 0))], [(0, 1, (60, 0))]]), max_n=30)
    assert res.status is Status.TIMEOUT
    assert [a.n_per_target for a in res.attempts] == [10, 20, 30]
    assert all(a.status == "INFEASIBLE" for a in res.attempts)


def test_zero_targets_and_cap():
    res = baseline_solve(instance([]))
    assert res.feasible and res.solution.cost == 0.0
    many = instance([[(0, 5, (k, 0))] for k in range(13)])
    with pytest.raises(CapabilityError):
        baseline_solve(many)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_generated_solutions_validate(seed):
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=4, rows=6, cols=6,
                                                              seed=seed))
    res = baseline_solve(inst, budget=60.0)
    if res.feasible:
        assert validate_solution(inst, res.solution).ok


def test_doubling_supersets_stay_feasible():
    # n=5 samples are a subset of n=9 and n=17 (offsets k L/4 appear in k L/8, k L/16)
    inst = instance([[(0, 8, (2, 0))], [(2, 10, (0, 3), (0.2, 0))]],
                    obs=obstacles((0.5, 0.5, 1, 1)))
    ok = [baseline_solve(inst, start_n=n, max_n=n).feasible for n in (5, 9, 17)]
    first = ok.index(True)
    assert all(ok[first:])
