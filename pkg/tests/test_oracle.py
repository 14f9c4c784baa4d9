import math
import random

import pytest

from rbplan.depgraph import LabeledDepGraph, UnlabeledDepGraph, build_unlabeled
from rbplan.instances import worked_examples
from rbplan.oracle import (OracleCapError, joint_optimum_exhaustive, mfvs_exhaustive,
                           min_vertex_separation_exhaustive, mrb_labeled_exhaustive,
                           mrb_unlabeled_exhaustive)
from rbplan.tore_solvers import pqs_urbm

from _graphs import complete, labeled_corpus, two_cycles

FX = worked_examples()


def test_labeled_examples():
    r = mrb_labeled_exhaustive(LabeledDepGraph.from_arcs(7, FX["seven_discs"].arcs))
    assert r.value == 2 and r.enumerated == math.factorial(7)
    assert (5, 6, 2, 7, 4, 3, 1) in r.witnesses
    assert mrb_labeled_exhaustive(LabeledDepGraph.from_arcs(5, [])).value == 0
    assert mrb_labeled_exhaustive(complete(4)).value == 3


def test_unlabeled_examples():
    inst = FX["seven_discs"].instance
    u = build_unlabeled(inst.start, inst.goal)
    assert mrb_unlabeled_exhaustive(u).value == pqs_urbm(u).mrb
    one = UnlabeledDepGraph(frozenset({1}), frozenset({1}), frozenset({(1, 1)}))
    assert mrb_unlabeled_exhaustive(one).value == 0
    k33 = UnlabeledDepGraph(frozenset({1, 2, 3}), frozenset({1, 2, 3}),
                            frozenset((s, g) for s in (1, 2, 3) for g in (1, 2, 3)))
    assert mrb_unlabeled_exhaustive(k33).value == 2


def test_mfvs_examples():
    r = mfvs_exhaustive(LabeledDepGraph.from_arcs(10, FX["ten_bars"].arcs))
    assert r.value == 3
    assert frozenset({7, 9, 10}) in r.witnesses
    assert mfvs_exhaustive(two_cycles(3)).value == 3
    assert mfvs_exhaustive(LabeledDepGraph.from_arcs(4, [(1, 2), (2, 3), (1, 3)])).value == 0


def test_mfvs_counts_examined_subsets():
    r = mfvs_exhaustive(two_cycles(2))
    # sizes 0, 1 fail; all 6 pairs are examined at size 2
    assert r.enumerated == 1 + 4 + 6
    assert len(r.witnesses) == 4


def test_vertex_separation_examples():
    assert min_vertex_separation_exhaustive([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4)]).value == 1
    k4 = [(a, b) for a in range(1, 5) for b in range(a + 1, 5)]
    assert min_vertex_separation_exhaustive([1, 2, 3, 4], k4).value == 3
    assert min_vertex_separation_exhaustive([1, 2, 3], []).value == 0


def test_joint_examples():
    cyc = two_cycles(1)
    r = joint_optimum_exhaustive(cyc, 1.0, 2.0)
    assert r.value == 3
    assert all(total == 1 and peak == 1 for _, total, peak in r.witnesses)
    assert joint_optimum_exhaustive(LabeledDepGraph.from_arcs(4, []), 1, 4).value == 0


def test_caps():
    with pytest.raises(OracleCapError):
        mrb_labeled_exhaustive(complete(11))
    with pytest.raises(OracleCapError):
        joint_optimum_exhaustive(complete(8), 1, 8)
    with pytest.raises(OracleCapError):
        min_vertex_separation_exhaustive(list(range(10)), [])


def test_relabeling_invariance():
    rng = random.Random(13)
    for g in labeled_corpus(30, seed=14, nmax=7):
        perm = list(g.ids)
        rng.shuffle(perm)
        m = dict(zip(g.ids, perm))
        h = LabeledDepGraph(g.ids, frozenset((m[i], m[j]) for i, j in g.arcs))
        assert mrb_labeled_exhaustive(g).value == mrb_labeled_exhaustive(h).value
        assert mfvs_exhaustive(g).value == mfvs_exhaustive(h).value


def test_mrb_at_most_mfvs_oracles():
    for g in labeled_corpus(40, seed=15, nmax=7):
        assert mrb_labeled_exhaustive(g).value <= mfvs_exhaustive(g).value
