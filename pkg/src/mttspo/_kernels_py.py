"""Pure-Python hot kernels.

This module is the reference implementation; ``_kernels.pyx`` mirrors it
function for function and must return identical results.  Obstacles reach
the kernels as a flat edge soup (every boundary loop of every polygon,
interior on the left); interiors follow the even-odd rule.
"""

import heapq
import math
from fractions import Fraction

INF = math.inf

# Shewchuk's error bound for the floating-point orientation filter.
_MACHINE_EPS = 2.0 ** -53
_CCW_ERRBOUND = (3.0 + 16.0 * _MACHINE_EPS) * _MACHINE_EPS

BACKEND = "python"
# catch times overshooting an interval end by this relative amount snap to it
TIME_EPS = 1e-9


def prepare_edges(edge_array):
    return [tuple(map(float, row)) for row in edge_array]


def prepare_graph(indptr, indices, costs):
    indptr = [int(i) for i in indptr]
    indices = [int(i) for i in indices]
    costs = [float(c) for c in costs]
    return [
        list(zip(indices[indptr[i]:indptr[i + 1]], costs[indptr[i]:indptr[i + 1]]))
        for i in range(len(indptr) - 1)
    ]


def orient_exact(ax, ay, bx, by, cx, cy):
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (ax, ay, bx, by, cx, cy))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient(ax, ay, bx, by, cx, cy):
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear (exact)."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    bound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if detleft == 0.0 and detright == 0.0:
        if (ax == cx or by == cy) and (ay == cy or bx == cx):
            return 0
    return orient_exact(ax, ay, bx, by, cx, cy)


def _dist2_point_segment(px, py, cx, cy, ex, ey):
    dx = ex - cx
    dy = ey - cy
    den = dx * dx + dy * dy
    if den == 0.0:
        return (px - cx) ** 2 + (py - cy) ** 2
    u = ((px - cx) * dx + (py - cy) * dy) / den
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    qx = cx + u * dx - px
    qy = cy + u * dy - py
    return qx * qx + qy * qy


def point_in_interior(px, py, edges, tol=0.0):
    """Strict interior test; points on (or within ``tol`` of) a boundary are free."""
    inside = False
    tol2 = tol * tol
    for cx, cy, ex, ey in edges:
        if tol > 0.0:
            if (min(cx, ex) - tol <= px <= max(cx, ex) + tol
                    and min(cy, ey) - tol <= py <= max(cy, ey) + tol
                    and _dist2_point_segment(px, py, cx, cy, ex, ey) <= tol2):
                return False
        if (cy > py) != (ey > py):
            o = orient(cx, cy, ex, ey, px, py)
            if o == 0:
                return False
            if (ey > cy) == (o > 0):
                inside = not inside
        elif py == cy == ey and min(cx, ex) <= px <= max(cx, ex):
            return False
        elif (py == cy and px == cx) or (py == ey and px == ex):
            return False
    return inside


def segment_is_free(ax, ay, bx, by, edges, tol=1e-9):
    """True iff the open segment a-b misses every obstacle interior."""
    if ax == bx and ay == by:
        return not point_in_interior(ax, ay, edges, 0.0)
    minx = min(ax, bx)
    maxx = max(ax, bx)
    miny = min(ay, by)
    maxy = max(ay, by)
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    params = [0.0, 1.0]
    for cx, cy, ex, ey in edges:
        if (cx > maxx and ex > maxx) or (cx < minx and ex < minx):
            continue
        if (cy > maxy and ey > maxy) or (cy < miny and ey < miny):
            continue
        o1 = orient(ax, ay, bx, by, cx, cy)
        o2 = orient(ax, ay, bx, by, ex, ey)
        if o1 * o2 > 0:
            continue
        o3 = orient(cx, cy, ex, ey, ax, ay)
        o4 = orient(cx, cy, ex, ey, bx, by)
        if o3 * o4 > 0:
            continue
        if o1 * o2 < 0 and o3 * o4 < 0:
            return False
        if o1 == 0:
            u = ((cx - ax) * dx + (cy - ay) * dy) / den
            if 0.0 < u < 1.0:
                params.append(u)
        if o2 == 0:
            u = ((ex - ax) * dx + (ey - ay) * dy) / den
            if 0.0 < u < 1.0:
                params.append(u)
    params.sort()
    prev = params[0]
    for u in params[1:]:
        if u > prev:
            m = 0.5 * (prev + u)
            if point_in_interior(ax + m * dx, ay + m * dy, edges, tol):
                return False
            prev = u
    return True


def visible_mask(px, py, xs, ys, edges):
    return [segment_is_free(px, py, x, y, edges) for x, y in zip(xs, ys)]


def _halfplane(lo, hi, alpha, beta):
    # restrict (lo, hi) to {tau : alpha + beta * tau > 0}
    if beta == 0.0:
        return (lo, hi) if alpha > 0.0 else (1.0, 0.0)
    r = -alpha / beta
    if beta > 0.0:
        return (max(lo, r), hi)
    return (lo, min(hi, r))


def visible_intervals(qx, qy, px, py, vx, vy, t0, tf, edges, margin=0.0):
    """Maximal closed subintervals of [t0, tf] during which q sees p + v (t - t0).

    Each edge's shadow is an open time interval (sight line crossing the edge
    properly); the complement is verified once per piece, which removes
    blocked instants where the sight line enters an obstacle via vertices.
    Endpoints produced by occlusion (not window bounds) are pulled inward by
    ``margin``.
    """
    span = tf - t0
    if span < 0.0:
        return []
    p1x = px + vx * span
    p1y = py + vy * span
    minx = min(qx, px, p1x)
    maxx = max(qx, px, p1x)
    miny = min(qy, py, p1y)
    maxy = max(qy, py, p1y)
    shadows = []
    for cx, cy, ex, ey in edges:
        if (cx > maxx and ex > maxx) or (cx < minx and ex < minx):
            continue
        if (cy > maxy and ey > maxy) or (cy < miny and ey < miny):
            continue
        sigma = orient(cx, cy, ex, ey, qx, qy)
        if sigma == 0:
            continue
        lo, hi = 0.0, span
        # far side of the edge line
        ux, uy = ex - cx, ey - cy
        lo, hi = _halfplane(lo, hi, -sigma * (ux * (py - cy) - uy * (px - cx)),
                            -sigma * (ux * vy - uy * vx))
        if lo >= hi:
            continue
        # inside the cone spanned by c and e as seen from q
        ux, uy = cx - qx, cy - qy
        lo, hi = _halfplane(lo, hi, sigma * (ux * (py - qy) - uy * (px - qx)),
                            sigma * (ux * vy - uy * vx))
        if lo >= hi:
            continue
        ux, uy = ex - qx, ey - qy
        lo, hi = _halfplane(lo, hi, -sigma * (ux * (py - qy) - uy * (px - qx)),
                            -sigma * (ux * vy - uy * vx))
        if lo >= hi:
            continue
        shadows.append((lo, hi))
    shadows.sort()
    pieces = []
    cur = 0.0
    for lo, hi in shadows:
        if lo >= cur:
            pieces.append((cur, lo))
        if hi > cur:
            cur = hi
        if cur >= span:
            break
    if cur <= span:
        pieces.append((cur, span))
    out = []
    for a, b in pieces:
        if b > a:
            m = 0.5 * (a + b)
        else:
            m = a
        if not segment_is_free(qx, qy, px + vx * m, py + vy * m, edges):
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
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(hi, out[-1][1]))
        else:
            out.append((lo, hi))
    return out


def catch_window(qx, qy, t, px, py, vx, vy, tref, vmax):
    """Times t_s >= t at which a straight move from (q, t) meets the target.

    Returns (first, last); first > last means never.  The target is at
    p + v (t_s - tref).
    """
    wx = px + vx * (t - tref) - qx
    wy = py + vy * (t - tref) - qy
    a = vx * vx + vy * vy - vmax * vmax
    b = 2.0 * (wx * vx + wy * vy)
    c = wx * wx + wy * wy
    if c == 0.0:
        if a < 0.0 or (a == 0.0 and b <= 0.0):
            return t, INF
        if a == 0.0:
            return t, t
        r = -b / a
        return t, t + max(r, 0.0)
    if a < 0.0:
        disc = b * b - 4.0 * a * c
        sq = math.sqrt(disc)
        if b <= 0.0:
            r2 = 2.0 * c / (sq - b)
        else:
            r2 = (b + sq) / (-2.0 * a)
        return t + r2, INF
    if a == 0.0:
        if b < 0.0:
            return t - c / b, INF
        return INF, -INF
    disc = b * b - 4.0 * a * c
    eps = 1e-9 * max(b * b, abs(4.0 * a * c))
    if disc < -eps:
        return INF, -INF
    sq = math.sqrt(max(disc, 0.0))
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    if r2 < 0.0:
        return INF, -INF
    return t + max(r1, 0.0), t + r2


def earliest_intercept(qx, qy, t, px, py, vx, vy, tref, vmax, los, his):
    """Earliest interception time within the sorted intervals, or inf."""
    first, last = catch_window(qx, qy, t, px, py, vx, vy, tref, vmax)
    if first > last:
        return INF
    for lo, hi in zip(los, his):
        a = lo
        if a < first:
            a = first
        if a < t:
            a = t
        b = hi if hi < last else last
        if a <= b:
            return a
        if b >= t and a - b <= TIME_EPS * max(1.0, abs(b)):
            return b
    return INF


def astar(n, adj, xs, ys, h, start, start_adj, goal_ptr, goal_lo, goal_hi,
          start_lo, start_hi, motion, vmax, T, cap, trace=None):
    """A* from ``start`` to the moving goal (node n + 1), departing at time T.

    ``adj`` is the prepared base graph over nodes 0..n-1; node n is an extra
    start point whose (node, cost) edges are ``start_adj`` (None when the
    start is a base node).  ``xs/ys/h`` cover nodes 0..n.  Base nodes' visible
    interval sets toward the goal come in CSR form (``goal_ptr`` has n + 1
    entries); the extra start's set is ``start_lo/start_hi``.  Returns
    (g, parent, t_goal, expansions) with the goal's entries at index n + 1.
    """
    px, py, vx, vy, tref = motion
    goal = n + 1
    size = n + 2
    g = [INF] * size
    parent = [-1] * size
    closed = [False] * size
    g[start] = 0.0
    heap = [(h[start], -0.0, start)]
    t_goal = INF
    expansions = 0
    while heap:
        f, neg_g, v = heap[0]
        if closed[v] or -neg_g > g[v]:
            heapq.heappop(heap)
            continue
        if g[goal] <= f:
            break
        heapq.heappop(heap)
        if v == goal:
            break
        closed[v] = True
        expansions += 1
        gv = g[v]
        if trace is not None:
            trace.append((v, gv, f, parent[v]))
        if v == n:
            nbrs = start_adj if start_adj is not None else ()
            los, his = start_lo, start_hi
        else:
            nbrs = adj[v]
            k0 = goal_ptr[v]
            k1 = goal_ptr[v + 1]
            los, his = goal_lo[k0:k1], goal_hi[k0:k1]
        for w, c in nbrs:
            gc = gv + c
            if gc < g[w] and not closed[w] and gc <= cap:
                g[w] = gc
                parent[w] = v
                heapq.heappush(heap, (gc + h[w], -gc, w))
        if len(los):
            ts = earliest_intercept(xs[v], ys[v], T + gv, px, py, vx, vy, tref, vmax, los, his)
            if ts < INF:
                gc = ts - T
                if gc < g[goal] and gc <= cap:
                    g[goal] = gc
                    parent[goal] = v
                    t_goal = ts
                    heapq.heappush(heap, (gc, -gc, goal))
    return g, parent, t_goal, expansions
