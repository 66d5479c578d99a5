"""Time the compiled kernels against the pure-Python fallback.

Runs the geometry kernels on the obstacle map of a generated instance and
then a full ``solve`` per backend in a subprocess (the backend is fixed at
import).  Both backends must return identical results; the script exits 1
if they do not.

    python benchmarks/bench_kernels.py --seed 3 --targets 8
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile
import time

from mttspo import generator, kernels
from mttspo.model import save_instance


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def kernel_cases(inst):
    obs = inst.obstacles
    verts = list(obs.convex_vertices) + [inst.depot]
    wins = [w for ws in inst.targets for w in ws]

    def seg(k):
        e = k.prepare_edges(obs.edges)
        return [k.segment_is_free(a[0], a[1], b[0], b[1], e, 1e-9)
                for i, a in enumerate(verts) for b in verts[i + 1:]]

    def vis(k):
        e = k.prepare_edges(obs.edges)
        return [k.visible_intervals(q[0], q[1], w.p0[0], w.p0[1], w.vel[0], w.vel[1],
                                    w.t0, w.tf, e, 1e-9)
                for q in verts for w in wins]

    def pip(k):
        e = k.prepare_edges(obs.edges)
        x0, y0, x1, y1 = obs.bounds()
        n = 60
        return [k.point_in_interior(x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * j / n, e, 0.0)
                for i in range(n + 1) for j in range(n + 1)]

    return {"segment_is_free": seg, "visible_intervals": vis, "point_in_interior": pip}


def solve_in_subprocess(path, pure):
    env = dict(os.environ)
    env["MTTSPO_PURE_PYTHON"] = "1" if pure else "0"
    code = ("import json, sys, time\n"
            "from mttspo import kernels, tour_search\n"
            "from mttspo.model import load_instance\n"
            "inst = load_instance(sys.argv[1])\n"
            "t0 = time.perf_counter()\n"
            "res = tour_search.solve(inst)\n"
            "print(json.dumps({'backend': kernels.BACKEND, 'wall': time.perf_counter() - t0,\n"
            "                  'status': res.status.name,\n"
            "                  'cost': res.solution.cost if res.feasible else None}))\n")
    proc = subprocess.run([sys.executable, "-c", code, path], env=env, capture_output=True,
                          text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--targets", type=int, default=8)
    ap.add_argument("--rows", type=int, default=12)
    ap.add_argument("--cols", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args(argv)

    if "compiled" not in kernels.available_backends():
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    params = generator.GenParams(n_targets=args.targets, rows=args.rows, cols=args.cols,
                                 seed=args.seed)
    inst, _ = generator.generate_instance(params)
    py, cy = kernels.load_backend("python"), kernels.load_backend("compiled")

    ok = True
    print(f"{'kernel':<20}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, fn in kernel_cases(inst).items():
        tp, rp = _time(lambda: fn(py), args.repeat)
        tc, rc = _time(lambda: fn(cy), args.repeat)
        same = rp == rc
        ok &= same
        flag = "" if same else "  MISMATCH"
        print(f"{name:<20}{tp:>12.4f}{tc:>12.4f}{tp / max(tc, 1e-12):>10.1f}{flag}")

    if not args.skip_solve:
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "instance.json")
            save_instance(inst, path)
            rp = solve_in_subprocess(path, pure=True)
            rc = solve_in_subprocess(path, pure=False)
        same = (rp["status"], rp["cost"]) == (rc["status"], rc["cost"])
        ok &= same
        flag = "" if same else "  MISMATCH"
        print(f"{'solve':<20}{rp['wall']:>12.4f}{rc['wall']:>12.4f}"
              f"{rp['wall'] / max(rc['wall'], 1e-12):>10.1f}{flag}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
