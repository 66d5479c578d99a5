"""Command-line entry point.

Exit codes: 0 feasible/success, 1 input error, 3 infeasible, 4 timeout.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analysis, baseline, generator, model, render, tour_search, visgraph, window_graph
from .model import InstanceError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4

STATUS_EXIT = {"FEASIBLE": EXIT_OK, "INFEASIBLE": EXIT_INFEASIBLE, "TIMEOUT": EXIT_TIMEOUT}
BENCH_FIELDS = ["instance", "solver", "status", "wall_s", "cost", "visibility_s", "twg_s",
                "tree_s", "attempts"]


def _emit(args, payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(" ".join(f"{k}={v}" for k, v in payload.items()))


def _load(path):
    return model.load_instance(path)


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    traces = [] if args.trace_out else None
    prep_out: list = []
    res = tour_search.solve(inst, budget=args.budget, use_lookahead=not args.no_lookahead,
                            timing=not args.no_timing, prep_out=prep_out, traces=traces)
    sol_path = args.solution_out or args.out
    if res.solution is not None and sol_path:
        model.save_solution(res.solution, sol_path)
    if args.stats_out:
        stats = dict(res.stats.as_dict(), status=res.status.value)
        model.dump_json(stats, args.stats_out)
    if prep_out:
        prep = prep_out[0]
        if args.dump_dot:
            visgraph.write_dot(prep.graph, args.dump_dot)
        if args.dump_intervals:
            visgraph.write_interval_csv(prep.table, args.dump_intervals)
        if args.dump_lfdt:
            window_graph.write_lfdt_csv(prep.gtw, args.dump_lfdt)
    if traces is not None:
        with open(args.trace_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["search", "node", "g", "f", "parent"])
            for k, tr in enumerate(traces):
                for node, gv, f, parent in tr:
                    w.writerow([k, node, repr(float(gv)), repr(float(f)), parent])
    payload = {"status": res.status.value,
               "final_time": res.solution.final_time if res.solution else None}
    if res.solution is not None:
        payload["valid"] = model.validate_solution(inst, res.solution).ok
    _emit(args, payload)
    return STATUS_EXIT[res.status.value]


def cmd_baseline(args) -> int:
    inst = _load(args.instance)
    res = baseline.baseline_solve(inst, start_n=args.start_n, step=args.step,
                                  budget=args.budget, cap=args.cap, max_n=args.max_n,
                                  timing=not args.no_timing)
    sol_path = args.solution_out or args.out
    if res.solution is not None and sol_path:
        model.save_solution(res.solution, sol_path)
    if args.attempts_out:
        with open(args.attempts_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n_per_target", "wall_s", "status"])
            for a in res.attempts:
                w.writerow([a.n_per_target, "" if a.wall_s is None else repr(a.wall_s), a.status])
    _emit(args, {"status": res.status.value,
                 "final_time": res.solution.final_time if res.solution else None,
                 "n_per_target": res.attempts[-1].n_per_target if res.attempts else None,
                 "attempts": len(res.attempts)})
    return STATUS_EXIT[res.status.value]


def _gen_params(args, **over) -> generator.GenParams:
    kw = dict(n_targets=args.targets, windows_per_target=args.windows,
              sum_window_len=args.sum, rows=args.rows, cols=args.cols,
              cell_size=args.cell_size, occupancy_fraction=args.occupancy,
              v_max=args.vmax, beta=args.beta, seed=args.seed)
    kw.update(over)
    return generator.GenParams(**kw)


def _write_pair(out_dir: Path, stem: str, inst, witness) -> None:
    model.save_instance(inst, out_dir / f"{stem}.json")
    model.save_solution(witness, out_dir / f"{stem}.witness.json")


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inst, wit = generator.generate_instance(_gen_params(args))
    model.save_instance(inst, out / "instance.json")
    model.save_solution(wit, out / "witness.json")
    _emit(args, {"instance": str(out / "instance.json"), "witness": str(out / "witness.json"),
                 "witness_final_time": wit.final_time})
    return EXIT_OK


def sweep_plan(experiment: int, full_scale: bool = False, seeds: int = 5):
    """(stem, params, post) triples; post is ('shorten', sum) or ('split', k)."""
    targets = (10, 20, 30) if full_scale else (4, 6, 8)
    plan = []
    if experiment == 1:
        sums = list(range(2, 51, 4)) if full_scale else list(range(2, 27, 4))
        longest = sums[-1]
        for n in targets:
            for r in range(seeds):
                base = generator.GenParams(n_targets=n, windows_per_target=2,
                                           sum_window_len=float(longest), seed=r)
                for s in sorted(sums, reverse=True):
                    plan.append((f"exp1_t{n}_s{s}_r{r}", base, ("shorten", float(s))))
    elif experiment == 2:
        for n in targets:
            for r in range(seeds):
                base = generator.GenParams(n_targets=n, windows_per_target=1,
                                           sum_window_len=22.0, seed=r)
                for k in range(1, 7):
                    plan.append((f"exp2_t{n}_w{k}_r{r}", base, ("split", k)))
    else:
        raise ValueError("experiment must be 1 or 2")
    return plan


def cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache: dict = {}
    written = 0
    for stem, params, (kind, value) in sweep_plan(args.experiment, args.full_scale, args.seeds):
        params = generator.GenParams(**{**params.as_dict(), "seed": params.seed + args.seed})
        key = params
        if key not in cache:
            cache[key] = generator.generate_instance(params)
        inst, wit = cache[key]
        if kind == "shorten":
            inst, wit = generator.shorten_windows(inst, wit, value, params.seed)
        else:
            inst, wit = generator.split_windows(inst, wit, value, params.seed)
        _write_pair(out, stem, inst, wit)
        written += 1
    _emit(args, {"written": written, "out": str(out)})
    return EXIT_OK


def _bench_one(job):
    path, solver, budget = job
    inst = model.load_instance(path)
    row = dict.fromkeys(BENCH_FIELDS, "")
    row["instance"] = Path(path).name
    row["solver"] = solver
    t0 = time.perf_counter()
    if solver == "mtvg":
        res = tour_search.solve(inst, budget=budget)
        row["status"] = res.status.value
        st = res.stats
        row["visibility_s"] = repr(st.visibility_s) if st.visibility_s is not None else ""
        row["twg_s"] = repr(st.twg_s) if st.twg_s is not None else ""
        row["tree_s"] = repr(st.tree_s) if st.tree_s is not None else ""
        sol = res.solution
    else:
        res = baseline.baseline_solve(inst, budget=budget)
        row["status"] = res.status.value
        row["attempts"] = len(res.attempts)
        sol = res.solution
    row["wall_s"] = repr(time.perf_counter() - t0)
    row["cost"] = repr(sol.final_time) if sol is not None else ""
    return row


def cmd_bench(args) -> int:
    files = sorted(p for p in Path(args.dir).glob("*.json")
                   if not p.name.endswith(".witness.json") and p.name != "witness.json")
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in ("mtvg", "baseline"):
            raise InstanceError(f"unknown solver {s!r}")
    jobs = [(str(f), s, args.budget) for f in files for s in solvers]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        w.writeheader()
        w.writerows(rows)
    _emit(args, {"rows": len(rows), "out": args.out})
    return EXIT_OK


def cmd_render(args) -> int:
    inst = _load(args.instance)
    sol = model.load_solution(args.solution, inst) if args.solution else None
    Path(args.out).write_text(render.render_svg(inst, sol))
    _emit(args, {"out": args.out})
    return EXIT_OK


def cmd_analyze(args) -> int:
    inst = _load(args.instance)
    try:
        rep = analysis.usable_fraction(inst, cap=args.cap)
    except analysis.InfeasibleInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    analysis.write_report(rep, args.out, args.csv_prefix)
    _emit(args, {"min_fraction": rep.min_fraction, "out": args.out})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mttspo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, budget=None):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=float, default=budget, help="wall-clock seconds")
        sp.add_argument("--out", default=None)
        sp.add_argument("--json", action="store_true", help="machine-readable stdout")

    sp = sub.add_parser("solve", help="tree search over window-node sequences")
    sp.add_argument("instance")
    common(sp)
    sp.add_argument("--solution-out")
    sp.add_argument("--stats-out")
    sp.add_argument("--no-lookahead", action="store_true")
    sp.add_argument("--no-timing", action="store_true",
                    help="leave phase times null so stats files are reproducible")
    sp.add_argument("--dump-dot")
    sp.add_argument("--dump-intervals")
    sp.add_argument("--dump-lfdt")
    sp.add_argument("--trace-out")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("baseline", help="sampled-points baseline")
    sp.add_argument("instance")
    common(sp, budget=300.0)
    sp.add_argument("--start-n", type=int, default=10)
    sp.add_argument("--step", type=int, default=10)
    sp.add_argument("--max-n", type=int, default=None)
    sp.add_argument("--cap", type=int, default=baseline.DEFAULT_CAP)
    sp.add_argument("--solution-out")
    sp.add_argument("--attempts-out")
    sp.add_argument("--no-timing", action="store_true")
    sp.set_defaults(func=cmd_baseline)

    def gen_args(sp):
        d = generator.GenParams()
        sp.add_argument("--targets", type=int, default=d.n_targets)
        sp.add_argument("--windows", type=int, default=d.windows_per_target)
        sp.add_argument("--sum", type=float, default=d.sum_window_len)
        sp.add_argument("--rows", type=int, default=d.rows)
        sp.add_argument("--cols", type=int, default=d.cols)
        sp.add_argument("--cell-size", type=float, default=d.cell_size)
        sp.add_argument("--occupancy", type=float, default=d.occupancy_fraction)
        sp.add_argument("--vmax", type=float, default=d.v_max)
        sp.add_argument("--beta", type=float, default=d.beta)

    sp = sub.add_parser("generate", help="one feasible-by-construction instance")
    common(sp)
    gen_args(sp)
    sp.set_defaults(func=cmd_generate, out="instance_out")

    sp = sub.add_parser("sweep", help="experiment instance sets")
    sp.add_argument("--experiment", type=int, choices=(1, 2), required=True)
    common(sp)
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--full-scale", action="store_true",
                    help="10/20/30 targets and the full window-sum range")
    sp.set_defaults(func=cmd_sweep, out="sweep_out")

    sp = sub.add_parser("bench", help="run solvers over a directory of instances")
    sp.add_argument("dir")
    common(sp, budget=300.0)
    sp.add_argument("--solvers", default="mtvg,baseline")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_bench, out="bench.csv")

    sp = sub.add_parser("render", help="SVG picture of an instance and solution")
    sp.add_argument("instance")
    sp.add_argument("--solution")
    common(sp)
    sp.set_defaults(func=cmd_render, out="scene.svg")

    sp = sub.add_parser("analyze", help="usable-fraction report")
    sp.add_argument("instance")
    common(sp)
    sp.add_argument("--cap", type=int, default=analysis.DEFAULT_CAP)
    sp.add_argument("--csv-prefix")
    sp.set_defaults(func=cmd_analyze, out="usable.json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, generator.GenerationError, baseline.CapabilityError,
            analysis.CapabilityError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
