# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot kernels; same API and results as ``_kernels_py``."""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.algorithm cimport sort

from ._kernels_py import orient_exact

BACKEND = "compiled"
# catch times overshooting an interval end by this relative amount snap to it
cdef double TIME_EPS = 1e-9

cdef double _MACHINE_EPS = 2.0 ** -53
cdef double _CCW_ERRBOUND = (3.0 + 16.0 * _MACHINE_EPS) * _MACHINE_EPS

ctypedef pair[double, double] dpair
# heap entry (-f, (g, -id)): the max-heap then pops smallest f, largest g, smallest id
ctypedef pair[double, pair[double, long]] hentry


def prepare_edges(edge_array):
    return np.ascontiguousarray(np.asarray(edge_array, dtype=np.float64).reshape(-1, 4))


def prepare_graph(indptr, indices, costs):
    return (np.ascontiguousarray(indptr, dtype=np.int64),
            np.ascontiguousarray(indices, dtype=np.int64),
            np.ascontiguousarray(costs, dtype=np.float64))


cdef inline double _dmin(double a, double b) noexcept nogil:
    return a if a < b else b


cdef inline double _dmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef int _orient(double ax, double ay, double bx, double by, double cx, double cy):
    cdef double detleft = (ax - cx) * (by - cy)
    cdef double detright = (ay - cy) * (bx - cx)
    cdef double det = detleft - detright
    cdef double bound = _CCW_ERRBOUND * (fabs(detleft) + fabs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if detleft == 0.0 and detright == 0.0:
        if (ax == cx or by == cy) and (ay == cy or bx == cx):
            return 0
    return orient_exact(ax, ay, bx, by, cx, cy)


def orient(double ax, double ay, double bx, double by, double cx, double cy):
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear (exact)."""
    return _orient(ax, ay, bx, by, cx, cy)


cdef double _dist2_point_segment(double px, double py, double cx, double cy,
                                 double ex, double ey) noexcept nogil:
    cdef double dx = ex - cx
    cdef double dy = ey - cy
    cdef double den = dx * dx + dy * dy
    cdef double u, qx, qy
    if den == 0.0:
        return (px - cx) * (px - cx) + (py - cy) * (py - cy)
    u = ((px - cx) * dx + (py - cy) * dy) / den
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    qx = cx + u * dx - px
    qy = cy + u * dy - py
    return qx * qx + qy * qy


cdef bint _pip(double px, double py, const double[:, ::1] E, double tol) except -1:
    cdef bint inside = False
    cdef double tol2 = tol * tol
    cdef Py_ssize_t i
    cdef double cx, cy, ex, ey
    cdef int o
    for i in range(E.shape[0]):
        cx = E[i, 0]
        cy = E[i, 1]
        ex = E[i, 2]
        ey = E[i, 3]
        if tol > 0.0:
            if (_dmin(cx, ex) - tol <= px <= _dmax(cx, ex) + tol
                    and _dmin(cy, ey) - tol <= py <= _dmax(cy, ey) + tol
                    and _dist2_point_segment(px, py, cx, cy, ex, ey) <= tol2):
                return False
        if (cy > py) != (ey > py):
            o = _orient(cx, cy, ex, ey, px, py)
            if o == 0:
                return False
            if (ey > cy) == (o > 0):
                inside = not inside
        elif py == cy and cy == ey and _dmin(cx, ex) <= px <= _dmax(cx, ex):
            return False
        elif (py == cy and px == cx) or (py == ey and px == ex):
            return False
    return inside


def point_in_interior(double px, double py, const double[:, ::1] edges, double tol=0.0):
    """Strict interior test; points on (or within ``tol`` of) a boundary are free."""
    return bool(_pip(px, py, edges, tol))


cdef bint _seg_free(double ax, double ay, double bx, double by, const double[:, ::1] E,
                    double tol) except -1:
    if ax == bx and ay == by:
        return not _pip(ax, ay, E, 0.0)
    cdef double minx = _dmin(ax, bx), maxx = _dmax(ax, bx)
    cdef double miny = _dmin(ay, by), maxy = _dmax(ay, by)
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef vector[double] params
    cdef Py_ssize_t i, k
    cdef double cx, cy, ex, ey, u, prev, m
    cdef int o1, o2, o3, o4
    params.push_back(0.0)
    params.push_back(1.0)
    for i in range(E.shape[0]):
        cx = E[i, 0]
        cy = E[i, 1]
        ex = E[i, 2]
        ey = E[i, 3]
        if (cx > maxx and ex > maxx) or (cx < minx and ex < minx):
            continue
        if (cy > maxy and ey > maxy) or (cy < miny and ey < miny):
            continue
        o1 = _orient(ax, ay, bx, by, cx, cy)
        o2 = _orient(ax, ay, bx, by, ex, ey)
        if o1 * o2 > 0:
            continue
        o3 = _orient(cx, cy, ex, ey, ax, ay)
        o4 = _orient(cx, cy, ex, ey, bx, by)
        if o3 * o4 > 0:
            continue
        if o1 * o2 < 0 and o3 * o4 < 0:
            return False
        if o1 == 0:
            u = ((cx - ax) * dx + (cy - ay) * dy) / den
            if 0.0 < u < 1.0:
                params.push_back(u)
        if o2 == 0:
            u = ((ex - ax) * dx + (ey - ay) * dy) / den
            if 0.0 < u < 1.0:
                params.push_back(u)
    sort(params.begin(), params.end())
    prev = params[0]
    for k in range(1, <Py_ssize_t>params.size()):
        u = params[k]
        if u > prev:
            m = 0.5 * (prev + u)
            if _pip(ax + m * dx, ay + m * dy, E, tol):
                return False
            prev = u
    return True


def segment_is_free(double ax, double ay, double bx, double by, const double[:, ::1] edges,
                    double tol=1e-9):
    """True iff the open segment a-b misses every obstacle interior."""
    return bool(_seg_free(ax, ay, bx, by, edges, tol))


def visible_mask(double px, double py, xs, ys, const double[:, ::1] edges):
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    out = np.zeros(X.shape[0], dtype=bool)
    cdef unsigned char[::1] o = out.view(np.uint8)
    cdef Py_ssize_t i
    for i in range(X.shape[0]):
        o[i] = _seg_free(px, py, X[i], Y[i], edges, 1e-9)
    return out


cdef inline bint _halfplane(double* lo, double* hi, double alpha, double beta) noexcept nogil:
    # restrict (lo, hi) to {tau : alpha + beta * tau > 0}; False when emptied
    cdef double r
    if beta == 0.0:
        if not alpha > 0.0:
            lo[0] = 1.0
            hi[0] = 0.0
    else:
        r = -alpha / beta
        if beta > 0.0:
            lo[0] = _dmax(lo[0], r)
        else:
            hi[0] = _dmin(hi[0], r)
    return lo[0] < hi[0]


def visible_intervals(double qx, double qy, double px, double py, double vx, double vy,
                      double t0, double tf, const double[:, ::1] edges, double margin=0.0):
    """Maximal closed subintervals of [t0, tf] during which q sees p + v (t - t0)."""
    cdef double span = tf - t0
    if span < 0.0:
        return []
    cdef double p1x = px + vx * span
    cdef double p1y = py + vy * span
    cdef double minx = _dmin(_dmin(qx, px), p1x), maxx = _dmax(_dmax(qx, px), p1x)
    cdef double miny = _dmin(_dmin(qy, py), p1y), maxy = _dmax(_dmax(qy, py), p1y)
    cdef vector[dpair] shadows
    cdef vector[dpair] pieces
    cdef Py_ssize_t i
    cdef int sigma
    cdef double cx, cy, ex, ey, ux, uy, lo, hi, cur, a, b, m
    for i in range(edges.shape[0]):
        cx = edges[i, 0]
        cy = edges[i, 1]
        ex = edges[i, 2]
        ey = edges[i, 3]
        if (cx > maxx and ex > maxx) or (cx < minx and ex < minx):
            continue
        if (cy > maxy and ey > maxy) or (cy < miny and ey < miny):
            continue
        sigma = _orient(cx, cy, ex, ey, qx, qy)
        if sigma == 0:
            continue
        lo = 0.0
        hi = span
        ux = ex - cx
        uy = ey - cy
        if not _halfplane(&lo, &hi, -sigma * (ux * (py - cy) - uy * (px - cx)),
                          -sigma * (ux * vy - uy * vx)):
            continue
        ux = cx - qx
        uy = cy - qy
        if not _halfplane(&lo, &hi, sigma * (ux * (py - qy) - uy * (px - qx)),
                          sigma * (ux * vy - uy * vx)):
            continue
        ux = ex - qx
        uy = ey - qy
        if not _halfplane(&lo, &hi, -sigma * (ux * (py - qy) - uy * (px - qx)),
                          -sigma * (ux * vy - uy * vx)):
            continue
        shadows.push_back(dpair(lo, hi))
    sort(shadows.begin(), shadows.end())
    cur = 0.0
    for i in range(<Py_ssize_t>shadows.size()):
        lo = shadows[i].first
        hi = shadows[i].second
        if lo >= cur:
            pieces.push_back(dpair(cur, lo))
        if hi > cur:
            cur = hi
        if cur >= span:
            break
    if cur <= span:
        pieces.push_back(dpair(cur, span))
    out = []
    for i in range(<Py_ssize_t>pieces.size()):
        a = pieces[i].first
        b = pieces[i].second
        m = 0.5 * (a + b) if b > a else a
        if not _seg_free(qx, qy, px + vx * m, py + vy * m, edges, 1e-9):
            continue
        lo = t0 + a if a > 0.0 else t0
        hi = t0 + b if b < span else tf
        if b > a and margin > 0.0:
            if a > 0.0:
                lo += margin
            if b < span:
                hi -= margin
            if lo > hi:
                lo = hi = t0 + m
        if out and lo <= out[len(out) - 1][1]:
            out[len(out) - 1] = (out[len(out) - 1][0], _dmax(hi, out[len(out) - 1][1]))
        else:
            out.append((lo, hi))
    return out


cdef void _catch(double qx, double qy, double t, double px, double py, double vx, double vy,
                 double tref, double vmax, double* first, double* last) noexcept nogil:
    cdef double wx = px + vx * (t - tref) - qx
    cdef double wy = py + vy * (t - tref) - qy
    cdef double a = vx * vx + vy * vy - vmax * vmax
    cdef double b = 2.0 * (wx * vx + wy * vy)
    cdef double c = wx * wx + wy * wy
    cdef double disc, sq, r, r1, r2, eps
    if c == 0.0:
        first[0] = t
        if a < 0.0 or (a == 0.0 and b <= 0.0):
            last[0] = INFINITY
        elif a == 0.0:
            last[0] = t
        else:
            r = -b / a
            last[0] = t + _dmax(r, 0.0)
        return
    if a < 0.0:
        disc = b * b - 4.0 * a * c
        sq = sqrt(disc)
        if b <= 0.0:
            r2 = 2.0 * c / (sq - b)
        else:
            r2 = (b + sq) / (-2.0 * a)
        first[0] = t + r2
        last[0] = INFINITY
        return
    if a == 0.0:
        if b < 0.0:
            first[0] = t - c / b
            last[0] = INFINITY
        else:
            first[0] = INFINITY
            last[0] = -INFINITY
        return
    disc = b * b - 4.0 * a * c
    eps = 1e-9 * _dmax(b * b, fabs(4.0 * a * c))
    if disc < -eps:
        first[0] = INFINITY
        last[0] = -INFINITY
        return
    sq = sqrt(_dmax(disc, 0.0))
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    if r2 < 0.0:
        first[0] = INFINITY
        last[0] = -INFINITY
        return
    first[0] = t + _dmax(r1, 0.0)
    last[0] = t + r2


def catch_window(double qx, double qy, double t, double px, double py, double vx, double vy,
                 double tref, double vmax):
    """Times t_s >= t at which a straight move from (q, t) meets the target."""
    cdef double first, last
    _catch(qx, qy, t, px, py, vx, vy, tref, vmax, &first, &last)
    return first, last


cdef double _earliest(double qx, double qy, double t, double px, double py, double vx,
                      double vy, double tref, double vmax, const double* los, const double* his,
                      Py_ssize_t k) noexcept nogil:
    cdef double first, last, a, b
    cdef Py_ssize_t i
    _catch(qx, qy, t, px, py, vx, vy, tref, vmax, &first, &last)
    if first > last:
        return INFINITY
    for i in range(k):
        a = los[i]
        if a < first:
            a = first
        if a < t:
            a = t
        b = his[i] if his[i] < last else last
        if a <= b:
            return a
        if b >= t and a - b <= TIME_EPS * _dmax(1.0, fabs(b)):
            return b
    return INFINITY


def earliest_intercept(double qx, double qy, double t, double px, double py, double vx,
                       double vy, double tref, double vmax, los, his):
    """Earliest interception time within the sorted intervals, or inf."""
    cdef const double[::1] L = np.ascontiguousarray(los, dtype=np.float64)
    cdef const double[::1] H = np.ascontiguousarray(his, dtype=np.float64)
    if L.shape[0] == 0:
        return _earliest(qx, qy, t, px, py, vx, vy, tref, vmax, NULL, NULL, 0)
    return _earliest(qx, qy, t, px, py, vx, vy, tref, vmax, &L[0], &H[0], L.shape[0])


def astar(long n, adj, xs, ys, h, long start, start_adj, goal_ptr, goal_lo, goal_hi,
          start_lo, start_hi, motion, double vmax, double T, double cap, trace=None):
    """A* from ``start`` to the moving goal (node n + 1), departing at time T.

    Same contract as the pure-Python kernel; ``adj`` is the triple from
    ``prepare_graph``.
    """
    cdef const long long[::1] indptr = adj[0]
    cdef const long long[::1] indices = adj[1]
    cdef const double[::1] costs = adj[2]
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[::1] H = np.ascontiguousarray(h, dtype=np.float64)
    cdef const long long[::1] gp = np.ascontiguousarray(goal_ptr, dtype=np.int64)
    cdef const double[::1] glo = np.ascontiguousarray(goal_lo, dtype=np.float64)
    cdef const double[::1] ghi = np.ascontiguousarray(goal_hi, dtype=np.float64)
    cdef const double[::1] slo = np.ascontiguousarray(start_lo, dtype=np.float64)
    cdef const double[::1] shi = np.ascontiguousarray(start_hi, dtype=np.float64)
    cdef double px = motion[0], py = motion[1], vx = motion[2], vy = motion[3]
    cdef double tref = motion[4]
    cdef vector[long] s_nbr
    cdef vector[double] s_cost
    if start_adj is not None:
        for node, cost in start_adj:
            s_nbr.push_back(node)
            s_cost.push_back(cost)
    cdef long goal = n + 1
    cdef long size = n + 2
    g_arr = np.full(size, np.inf)
    parent_arr = np.full(size, -1, dtype=np.int64)
    cdef double[::1] g = g_arr
    cdef long long[::1] parent = parent_arr
    cdef vector[char] closed = vector[char](size, 0)
    cdef priority_queue[hentry] heap
    cdef hentry top
    cdef double f, gv, gc, ts, t_goal = INFINITY
    cdef long v, w, k, kk, k0, k1, nk
    cdef long expansions = 0
    cdef bint tracing = trace is not None
    cdef const double* los
    cdef const double* his
    g[start] = 0.0
    heap.push(hentry(-H[start], pair[double, long](0.0, -start)))
    while not heap.empty():
        top = heap.top()
        f = -top.first
        v = -top.second.second
        if closed[v] or top.second.first > g[v]:
            heap.pop()
            continue
        if g[goal] <= f:
            break
        heap.pop()
        if v == goal:
            break
        closed[v] = 1
        expansions += 1
        gv = g[v]
        if tracing:
            trace.append((v, gv, f, parent[v]))
        if v == n:
            for kk in range(<long>s_nbr.size()):
                w = s_nbr[kk]
                gc = gv + s_cost[kk]
                if gc < g[w] and not closed[w] and gc <= cap:
                    g[w] = gc
                    parent[w] = v
                    heap.push(hentry(-(gc + H[w]), pair[double, long](gc, -w)))
            nk = slo.shape[0]
            los = &slo[0] if nk else NULL
            his = &shi[0] if nk else NULL
        else:
            for kk in range(indptr[v], indptr[v + 1]):
                w = indices[kk]
                gc = gv + costs[kk]
                if gc < g[w] and not closed[w] and gc <= cap:
                    g[w] = gc
                    parent[w] = v
                    heap.push(hentry(-(gc + H[w]), pair[double, long](gc, -w)))
            k0 = gp[v]
            k1 = gp[v + 1]
            nk = k1 - k0
            los = &glo[k0] if nk else NULL
            his = &ghi[k0] if nk else NULL
        if nk:
            ts = _earliest(X[v], Y[v], T + gv, px, py, vx, vy, tref, vmax, los, his, nk)
            if ts < INFINITY:
                gc = ts - T
                if gc < g[goal] and gc <= cap:
                    g[goal] = gc
                    parent[goal] = v
                    t_goal = ts
                    heap.push(hentry(-gc, pair[double, long](gc, -goal)))
    return g_arr, parent_arr, t_goal, expansions
