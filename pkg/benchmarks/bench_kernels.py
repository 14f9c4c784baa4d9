"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--csv out.csv]

Each case runs the same solver twice, once with ``force_python=True``, and
checks that both backends return the same MRB before reporting timings.
"""
import argparse
import csv
import random
import sys
import time

from rbplan import kernels
from rbplan.depgraph import LabeledDepGraph, UnlabeledDepGraph
from rbplan.tore_solvers import dfdp, dfdp_unlabeled, dp_lrbm


def labeled(n, p, seed):
    rng = random.Random(seed)
    arcs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j and rng.random() < p]
    return LabeledDepGraph.from_arcs(n, arcs)


def bipartite(m, p, seed):
    rng = random.Random(seed)
    ids = frozenset(range(1, m + 1))
    edges = frozenset((s, g) for s in ids for g in ids if rng.random() < p)
    return UnlabeledDepGraph(ids, ids, edges)


CASES = [
    ("dp_lrbm", "labeled n=14 p=0.3", lambda: labeled(14, 0.3, 1),
     lambda g, py: dp_lrbm(g, force_python=py)),
    ("dp_lrbm", "labeled n=17 p=0.2", lambda: labeled(17, 0.2, 2),
     lambda g, py: dp_lrbm(g, force_python=py)),
    ("dfdp", "labeled n=22 p=0.25", lambda: labeled(22, 0.25, 3),
     lambda g, py: dfdp(g, decompose=False, force_python=py)),
    ("dfdp", "labeled n=26 p=0.15", lambda: labeled(26, 0.15, 4),
     lambda g, py: dfdp(g, decompose=False, force_python=py)),
    ("dfdp_unlabeled", "bipartite m=60 p=0.07", lambda: bipartite(60, 0.07, 5),
     lambda g, py: dfdp_unlabeled(g, force_python=py)),
]


def best_of(fn, repeat):
    best, out = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    if kernels.BACKEND != "cython":
        print("compiled kernels are not built; only the Python timings are meaningful",
              file=sys.stderr)
    rows = []
    for solver, label, make, run in CASES:
        g = make()
        t_c, rc = best_of(lambda: run(g, False), args.repeat)
        t_py, rp = best_of(lambda: run(g, True), args.repeat)
        if rc.mrb != rp.mrb:
            raise SystemExit(f"{solver} {label}: backends disagree ({rc.mrb} vs {rp.mrb})")
        rows.append([solver, label, rc.mrb, f"{t_c:.4f}", f"{t_py:.4f}", f"{t_py / max(t_c, 1e-9):.1f}"])
    header = ["solver", "case", "mrb", kernels.BACKEND + "_s", "python_s", "speedup"]
    width = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, width)))
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            csv.writer(f).writerows([header] + rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
