import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mttspo import kernels
from mttspo.geometry import load_occupancy_grid

PY = kernels.load_backend("python")
EDGES = load_occupancy_grid(4, 4, 1.0, {(0, 1), (1, 1), (2, 3), (3, 0)}).edges

fin = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(fin, fin, fin, fin, fin, fin)
def test_orient_is_exact(ax, ay, bx, by, cx, cy):
    F = Fraction
    det = (F(ax) - F(cx)) * (F(by) - F(cy)) - (F(ay) - F(cy)) * (F(bx) - F(cx))
    want = (det > 0) - (det < 0)
    for name in kernels.available_backends():
        assert kernels.load_backend(name).orient(ax, ay, bx, by, cx, cy) == want


def test_orient_near_degenerate():
    # c is 1 ulp off the line through a and b
    x = 0.1 + 0.2
    assert PY.orient(0.0, 0.0, 1.0, 1.0, x, math.nextafter(x, 1.0)) == 1
    assert PY.orient(0.0, 0.0, 1.0, 1.0, x, x) == 0


def test_available_backends_lists_python():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.load_backend("fortran")


def _random_cases(seed, n):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield rng.random(12) * 5 - 0.5


@pytest.mark.parametrize("seed", range(3))
def test_backends_agree_on_geometry(backend, seed):
    e_b = backend.prepare_edges(EDGES)
    e_p = PY.prepare_edges(EDGES)
    for v in _random_cases(seed, 300):
        assert backend.point_in_interior(v[0], v[1], e_b, 0.0) == PY.point_in_interior(
            v[0], v[1], e_p, 0.0)
        assert backend.segment_is_free(*v[:4], e_b) == PY.segment_is_free(*v[:4], e_p)
        vel = (v[4] - 2.5) * 0.3, (v[5] - 2.5) * 0.3
        args = (v[6], v[7], v[8], v[9], vel[0], vel[1], 1.0, 1.0 + v[10])
        assert backend.visible_intervals(*args, e_b, 1e-9) == PY.visible_intervals(
            *args, e_p, 1e-9)
    xs = np.linspace(0, 4, 9)
    assert list(backend.visible_mask(0.5, 3.5, xs, xs[::-1], e_b)) == list(
        PY.visible_mask(0.5, 3.5, xs, xs[::-1], e_p))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=7, max_size=7),
       st.floats(0.1, 3.0))
def test_catch_window_matches_between_backends(v, vmax):
    args = (v[0], v[1], v[2], v[3], v[4], v[5] * 0.1, v[6] * 0.1, 0.0, vmax)
    for name in kernels.available_backends():
        assert kernels.load_backend(name).catch_window(*args) == PY.catch_window(*args)


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 5), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0, 0.95), st.floats(0, 2 * math.pi))
def test_catch_window_is_first_feasible_time(qx, qy, t, px, py, speed, heading):
    vx, vy = speed * math.cos(heading), speed * math.sin(heading)
    first, last = PY.catch_window(qx, qy, t, px, py, vx, vy, 0.0, 1.0)

    def gap(ts):
        return math.hypot(px + vx * ts - qx, py + vy * ts - qy) - (ts - t)

    assert first <= last
    assert first >= t
    assert gap(first) <= 1e-7 * (1 + abs(first))
    # a slower-than-agent target can be caught at any later time
    assert last == math.inf
    if first > t + 1e-6:
        assert gap(first - 1e-6) > 0


def test_earliest_intercept_picks_later_interval():
    # stationary target 5 m away: the first interval closes before reachable
    ts = PY.earliest_intercept(0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 1.0, [0.0, 7.0], [3.0, 9.0])
    assert ts == 7.0
    assert PY.earliest_intercept(0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 1.0, [0.0], [3.0]) \
        == math.inf


def test_astar_backends_agree():
    from mttspo import generator, tour_search
    inst, _ = generator.generate_instance(generator.GenParams(n_targets=4, seed=11))
    runs = {}
    for name in kernels.available_backends():
        k = kernels.load_backend(name)
        prep = tour_search.prepare(inst, with_gtw=False)
        g, tbl = prep.graph, prep.table
        graph = k.prepare_graph(g.indptr, g.indices, g.costs)
        out = []
        for s in prep.nodes[1:]:
            ga = tbl.goal_arrays(s)
            xs = np.append(g.xs, 0.0)
            ys = np.append(g.ys, 0.0)
            h = np.append(ga.h, 0.0)
            trace = []
            gv, par, tg, ex = k.astar(g.n, graph, xs, ys, h, g.depot_id, None, ga.ptr, ga.lo,
                                      ga.hi, [], [], s.motion_tuple(), g.v_max, 0.0,
                                      s.tf, trace)
            out.append((list(map(float, gv)), list(map(int, par)), tg, ex, trace))
        runs[name] = out
    first = next(iter(runs.values()))
    for out in runs.values():
        assert out == first
