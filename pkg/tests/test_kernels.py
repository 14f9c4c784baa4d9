import math
import os
import subprocess
import sys

import numpy as np
import pytest

from rbplan import kernels
from rbplan.depgraph import LabeledDepGraph
from rbplan.tore_solvers import dfdp, dfdp_unlabeled, dp_lrbm

from _graphs import bipartite_corpus, complete, labeled_corpus

native = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


@native
def test_dp_tables_identical():
    for g in labeled_corpus(40, seed=51, nmax=12):
        out = g.out_masks()
        c = kernels.dp_labeled(out)
        p = kernels.dp_labeled(out, force_python=True)
        for a, b in zip(c, p):
            assert np.array_equal(a, b)


@native
def test_dfdp_decide_identical():
    for g in labeled_corpus(60, seed=52, nmax=10):
        out = g.out_masks()
        for rb in range(0, 4):
            c = kernels.dfdp_labeled_decide(out, rb, math.inf)
            p = kernels.dfdp_labeled_decide(out, rb, math.inf, force_python=True)
            assert c == p


@native
def test_unlabeled_decide_identical():
    for g in bipartite_corpus(60, seed=53, mmax=9):
        _, _, masks = g.goal_masks()
        for rb in range(0, 4):
            c = kernels.dfdp_unlabeled_decide(masks, rb, math.inf)
            p = kernels.dfdp_unlabeled_decide(masks, rb, math.inf, force_python=True)
            assert c == p


def test_solver_results_backend_independent():
    for g in labeled_corpus(30, seed=54, nmax=9):
        a, b = dfdp(g), dfdp(g, force_python=True)
        assert (a.mrb, a.ordering) == (b.mrb, b.ordering)
        assert dp_lrbm(g).mrb == dp_lrbm(g, force_python=True).mrb
    for g in bipartite_corpus(30, seed=55, mmax=8):
        a, b = dfdp_unlabeled(g), dfdp_unlabeled(g, force_python=True)
        assert (a.mrb, a.ordering) == (b.mrb, b.ordering)


def test_wide_instances_use_python_ints():
    # 70 objects in 35 disjoint swaps: wider than a machine word
    arcs = []
    for k in range(35):
        arcs += [(2 * k + 1, 2 * k + 2), (2 * k + 2, 2 * k + 1)]
    g = LabeledDepGraph.from_arcs(70, arcs)
    assert dfdp(g, decompose=False).mrb == 1


def test_pure_env_forces_python():
    code = "from rbplan import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, RBPLAN_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_decide_timeout_flag():
    out = complete(30).out_masks()
    # budget 27 is infeasible for K30 and the subset space is far too big to exhaust
    for force in (True, False):
        order, nodes, timed_out = kernels.dfdp_labeled_decide(out, 27, 0.0, force_python=force)
        assert timed_out and order is None and nodes >= 1
