"""rbplan command line: generate, solve, tori, bench, verify."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import buffer_mip, instances, sepplan as sep, tore_solvers as ts, trlb
from .depgraph import build_labeled, build_unlabeled

BENCH_COLUMNS = ["suite", "instance", "n", "rho", "trial", "seed", "method", "mrb", "total",
                 "elapsed", "nodes", "success"]
SUMMARY_COLUMNS = ["suite", "method", "n", "rho", "trials", "success_rate", "mean_elapsed",
                   "mean_mrb", "mean_total"]


def _write_text(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ generate

def cmd_generate(args) -> int:
    fam = args.family
    if fam == "random":
        cfg = instances.GeneratorConfig(n=args.n, rho=args.rho, width=args.width,
                                        height=args.height, seed=args.seed,
                                        labeling=args.labeling)
        inst = instances.random_instance(cfg)
    elif fam == "grid":
        inst = instances.dependency_grid_instance(args.m)
    elif fam == "cycle":
        inst = instances.labeled_cycle_instance(args.n)
    elif fam == "cuboid":
        inst = instances.thin_cuboid_instance(args.n)
    else:
        fx = instances.worked_examples()
        if args.name not in fx:
            print(f"unknown fixture {args.name!r}; choose from {', '.join(sorted(fx))}",
                  file=sys.stderr)
            return 2
        inst = fx[args.name].instance
    text = json.dumps(instances.instance_to_dict(inst), indent=2) + "\n"
    _write_text(text, args.out)
    return 0


# --------------------------------------------------------------------- solve

def _sepplan_dict(res: sep.SepPlanResult, n: int) -> dict:
    return {"schema": 1, "method": "sepplan", "setting": "unlabeled", "status": ts.SOLVED,
            "mrb": res.peak, "ordering": res.sequence, "trace": res.rb_trace,
            "bound": sep.sepplan_bound(n),
            "levels": [[lv.size, lv.separator, lv.cleared] for lv in res.levels]}


def solve_instance(inst, setting: str, method: str, time_limit: float,
                   alpha: float = 1.0, beta: Optional[float] = None, timing: bool = True) -> dict:
    """Dispatch one solver; returns the report dictionary."""
    if setting == "labeled":
        g = build_labeled(inst.start, inst.goal)
        if method == "dp":
            return ts.dp_lrbm(g).to_dict(timing)
        if method == "dfdp":
            return ts.dfdp(g, time_limit).to_dict(timing)
        if method == "bnb":
            model = buffer_mip.build_model(g, alpha, beta)
            if g.n <= buffer_mip.BNB_CAP:
                rep = buffer_mip.solve_bnb(model, time_limit)
            else:
                rep = buffer_mip.tb_given_mrb(g, time_limit)
            return rep.to_dict(timing)
        raise ValueError(f"method {method!r} does not apply to labeled instances")
    g = build_unlabeled(inst.start, inst.goal)
    if method == "pqs":
        return ts.pqs_urbm(g, time_limit).to_dict(timing)
    if method == "dfdp":
        return ts.dfdp_unlabeled(g, time_limit).to_dict(timing)
    if method == "sepplan":
        t0 = time.perf_counter()
        d = _sepplan_dict(sep.sepplan(g, inst.start, inst.goal, check_planar=False),
                          len(g.goals))
        if timing:
            d["elapsed"] = time.perf_counter() - t0
        return d
    raise ValueError(f"method {method!r} does not apply to unlabeled instances")


def cmd_solve(args) -> int:
    inst = instances.load_instance(args.inp)
    setting = args.setting or ("labeled" if inst.labeled else "unlabeled")
    method = args.method or ("dfdp" if setting == "labeled" else "pqs")
    try:
        rep = solve_instance(inst, setting, method, args.time_limit, args.alpha, args.beta,
                             not args.omit_timing)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _write_text(json.dumps(rep, indent=2) + "\n", args.out)
    return 0 if rep.get("status") in (ts.SOLVED, buffer_mip.HEURISTIC) else 1


# ---------------------------------------------------------------------- tori

def cmd_tori(args) -> int:
    inst = instances.load_instance(args.inp)
    cfg = trlb.TrlbConfig(planner=args.planner, primitive=args.primitive, buffer=args.buffer,
                          preprocessing=args.pp, max_time=args.max_time, seed=args.seed)
    plan, stats = trlb.trlb_solve(inst.start, inst.goal, cfg)
    if plan.status == trlb.SOLVED:
        # never write a plan that does not replay
        ok, bad = trlb.validate_plan(inst.start, inst.goal, plan.actions)
        if not ok:
            print(f"internal error: {bad[0]}", file=sys.stderr)
            return 3
    _write_text(trlb.plan_to_json(plan, stats, not args.omit_timing, inst.name) + "\n", args.out)
    return 0 if plan.status == trlb.SOLVED else 1


# -------------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    inst = instances.load_instance(args.inp)
    actions = trlb.plan_from_json(Path(args.plan).read_text())
    ok, bad = trlb.validate_plan(inst.start, inst.goal, actions, labeled=inst.labeled)
    if ok:
        print("ok")
        return 0
    print(bad[0])
    return 1


# --------------------------------------------------------------------- bench

def trial_seed(seed_base: int, n: int, rho: float, trial: int) -> int:
    ss = np.random.SeedSequence([seed_base, n, int(round(rho * 1000)), trial])
    return int(ss.generate_state(1)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def _run_trial(suite: str, n: int, rho: float, trial: int, seed: int, time_limit: float,
               family: str) -> List[dict]:
    rows = []
    base = {"suite": suite, "n": n, "rho": rho, "trial": trial, "seed": seed}
    if suite in ("lrbm", "urbm", "tori"):
        labeling = "unlabeled" if suite == "urbm" else "random"
        inst = instances.random_instance(instances.GeneratorConfig(n=n, rho=rho, seed=seed,
                                                                   labeling=labeling))
    elif family == "grid":
        inst = instances.dependency_grid_instance(n)
    elif family == "cycle":
        inst = instances.labeled_cycle_instance(n)
    else:
        inst = instances.thin_cuboid_instance(n)
    name = inst.name
    if suite == "tori":
        cfg = trlb.TrlbConfig(planner="bst", primitive="rbm", buffer="sampling",
                              max_time=time_limit, seed=seed)
        plan, stats = trlb.trlb_solve(inst.start, inst.goal, cfg)
        rows.append(dict(base, instance=name, method="rbm-sp-bst", mrb=None, total=len(plan),
                         elapsed=stats["elapsed"], nodes=stats["allocation_calls"],
                         success=plan.status == trlb.SOLVED and plan.valid))
        return rows
    if suite == "lrbm" or (suite == "special" and inst.labeled):
        rep = ts.dfdp(build_labeled(inst.start, inst.goal), time_limit)
    else:
        rep = ts.pqs_urbm(build_unlabeled(inst.start, inst.goal), time_limit)
    total = rep.plan.total_buffers() if rep.plan is not None else None
    rows.append(dict(base, instance=name, method=rep.method, mrb=rep.mrb, total=total,
                     elapsed=rep.elapsed, nodes=rep.nodes_expanded, success=rep.solved))
    return rows


def _threads() -> int:
    env = os.environ.get("REARRANGE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def run_bench(suite: str, sizes: List[int], densities: List[float], trials: int,
              time_limit: float, seed_base: int = 0, family: str = "grid") -> List[dict]:
    jobs = []
    for n in sizes:
        if suite == "special":
            jobs.append((suite, n, 0.0, 0, trial_seed(seed_base, n, 0.0, 0), time_limit, family))
            continue
        for rho in densities:
            for t in range(trials):
                jobs.append((suite, n, rho, t, trial_seed(seed_base, n, rho, t), time_limit, family))
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        chunks = list(ex.map(lambda j: _run_trial(*j), jobs))
    rows = [r for c in chunks for r in c]
    rows.sort(key=lambda r: (r["suite"], r["method"], r["n"], r["rho"], r["trial"]))
    return rows


def summarize(rows: List[dict]) -> List[dict]:
    groups: Dict[tuple, List[dict]] = {}
    for r in rows:
        groups.setdefault((r["suite"], r["method"], r["n"], r["rho"]), []).append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        mrbs = [r["mrb"] for r in rs if r["mrb"] is not None]
        tots = [r["total"] for r in rs if r["total"] is not None]
        out.append({"suite": key[0], "method": key[1], "n": key[2], "rho": key[3],
                    "trials": len(rs),
                    "success_rate": sum(1 for r in rs if r["success"]) / len(rs),
                    "mean_elapsed": sum(r["elapsed"] for r in rs) / len(rs),
                    "mean_mrb": sum(mrbs) / len(mrbs) if mrbs else None,
                    "mean_total": sum(tots) / len(tots) if tots else None})
    return out


def rows_to_csv(rows: List[dict], columns: List[str], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if (not timing and "elapsed" in c) else _fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def summary_path(path: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + "_summary" + (p.suffix or ".csv"))


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()] if args.sizes else []
    dens = [float(s) for s in args.densities.split(",") if s.strip()] if args.densities else []
    rows = run_bench(args.suite, sizes, dens, args.trials, args.time_limit, args.seed_base,
                     args.family)
    timing = not args.omit_timing
    text = rows_to_csv(rows, BENCH_COLUMNS, timing)
    summary = rows_to_csv(summarize(rows), SUMMARY_COLUMNS, timing)
    if args.csv:
        Path(args.csv).write_text(text)
        summary_path(args.csv).write_text(summary)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbplan", description="Minimum running buffer rearrangement planning")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--family", choices=["random", "grid", "cycle", "cuboid", "fixture"], default="random")
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--rho", type=float, default=0.3)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--labeling", choices=["random", "identity", "unlabeled"], default="random")
    g.add_argument("--width", type=float, default=100.0)
    g.add_argument("--height", type=float, default=100.0)
    g.add_argument("--name", default="seven_discs")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve the external-buffer problem")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--setting", choices=["labeled", "unlabeled"])
    s.add_argument("--method", choices=["dp", "dfdp", "pqs", "sepplan", "bnb"])
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--time-limit", type=float, default=300.0)
    s.add_argument("--omit-timing", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("tori", help="plan with buffers inside the workspace")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--planner", choices=["os", "st", "bst"], default="bst")
    t.add_argument("--primitive", choices=["rbm", "tbm", "ro"], default="rbm")
    t.add_argument("--buffer", choices=["sp", "opt"], default="sp")
    t.add_argument("--pp", action="store_true", help="unlabeled preprocessing")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--max-time", type=float, default=60.0)
    t.add_argument("--omit-timing", action="store_true")
    t.add_argument("--out")
    t.set_defaults(func=cmd_tori)

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("--suite", choices=["lrbm", "urbm", "special", "tori"], required=True)
    b.add_argument("--sizes", default="")
    b.add_argument("--densities", default="0.3")
    b.add_argument("--trials", type=int, default=30)
    b.add_argument("--time-limit", type=float, default=60.0)
    b.add_argument("--seed-base", type=int, default=0)
    b.add_argument("--family", choices=["grid", "cycle", "cuboid"], default="grid",
                   help="instance family for the special suite")
    b.add_argument("--omit-timing", action="store_true")
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="replay a TORI plan")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--plan", required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
