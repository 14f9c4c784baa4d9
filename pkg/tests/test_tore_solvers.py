import json
import random

import pytest

from rbplan.depgraph import (LabeledDepGraph, UnlabeledDepGraph, build_labeled, build_unlabeled,
                             evaluate_ordering)
from rbplan.instances import (dependency_grid_instance, random_instance, thin_cuboid_instance,
                              worked_examples, GeneratorConfig)
from rbplan.oracle import mfvs_exhaustive, mrb_labeled_exhaustive, mrb_unlabeled_exhaustive
from rbplan.plan import BUFFER_TO_GOAL, START_TO_BUFFER, START_TO_GOAL
from rbplan.tore_solvers import (CapacityError, DpTable, SOLVED, TIMED_OUT, dfdp, dfdp_unlabeled,
                                 dp_lrbm, free_goals, plan_from_witness, pqs_urbm,
                                 unlabeled_plan, unlabeled_rb, unlabeled_trace)

from _graphs import bipartite_corpus, complete, labeled_corpus, two_cycles

FX = worked_examples()


def seven_discs():
    return LabeledDepGraph.from_arcs(7, FX["seven_discs"].arcs)


def seven_discs_unlabeled():
    inst = FX["seven_discs"].instance
    return build_unlabeled(inst.start, inst.goal)


def test_dp_seven_discs():
    rep = dp_lrbm(seven_discs())
    assert rep.mrb == 2 and rep.status == SOLVED
    assert evaluate_ordering(seven_discs(), rep.ordering).rb == 2


def test_dp_last_object_candidates():
    table = DpTable(seven_discs())
    assert table.candidates({2, 5, 6}) == {2: 2, 5: 3, 6: 2}
    node = table.node({2, 5, 6})
    # 2 still waits on 7 and 5 on 1, 3, 7; 6 only needed 5 gone
    assert node.buffered == frozenset({2, 5})
    assert node.mrb == 2


def test_dp_edgeless_and_cap():
    assert dp_lrbm(LabeledDepGraph.from_arcs(12, [])).mrb == 0
    with pytest.raises(CapacityError):
        dp_lrbm(LabeledDepGraph.from_arcs(12, []), cap=10)


def test_dfdp_examples():
    assert dfdp(seven_discs()).mrb == 2
    cub = thin_cuboid_instance(6)
    assert dfdp(build_labeled(cub.start, cub.goal)).mrb == 5
    assert dfdp(two_cycles(3)).mrb == 1
    assert dfdp(LabeledDepGraph.from_arcs(5, [])).mrb == 0


def test_dfdp_without_decomposition_agrees():
    for g in labeled_corpus(60, seed=21, nmax=8):
        assert dfdp(g, decompose=False).mrb == dfdp(g).mrb


def test_dfdp_times_out():
    rep = dfdp(complete(40), time_limit=0.01, decompose=False)
    assert rep.status == TIMED_OUT and rep.mrb is None
    assert rep.lower_bound is not None


def test_thin_cuboid_unlabeled():
    cub = thin_cuboid_instance(6)
    assert pqs_urbm(build_unlabeled(cub.start, cub.goal)).mrb == 5
    four = thin_cuboid_instance(4)
    g4 = build_unlabeled(four.start, four.goal)
    assert mrb_unlabeled_exhaustive(g4).value == 3 == dfdp_unlabeled(g4).mrb
    two = thin_cuboid_instance(2)
    assert dfdp(build_labeled(two.start, two.goal)).mrb == 1


def test_unlabeled_examples():
    grid = dependency_grid_instance(2)
    g = build_unlabeled(grid.start, grid.goal)
    assert dfdp_unlabeled(g).mrb == mrb_unlabeled_exhaustive(g).value
    empty = UnlabeledDepGraph(frozenset({1, 2, 3}), frozenset({1, 2, 3}), frozenset())
    rep = pqs_urbm(empty)
    assert rep.mrb == 0 and rep.ordering == [1, 2, 3]
    assert dfdp_unlabeled(empty).mrb == 0
    u = seven_discs_unlabeled()
    assert dfdp_unlabeled(u).mrb == pqs_urbm(u).mrb
    g3 = dependency_grid_instance(3)
    u3 = build_unlabeled(g3.start, g3.goal)
    assert pqs_urbm(u3).mrb == dfdp_unlabeled(u3).mrb


def test_removing_goal_five_frees_three_goals():
    u = seven_discs_unlabeled()
    initial = [1, 6, 7]
    assert free_goals(u) == [1, 6, 7]
    assert free_goals(u, initial) == []
    assert free_goals(u, initial + [5]) == [2, 3, 4]


def test_unlabeled_plan_matches_trace():
    rng = random.Random(4)
    for g in bipartite_corpus(150, seed=9, mmax=8):
        seq = g.goal_ids
        rng.shuffle(seq)
        plan = unlabeled_plan(g, seq)
        assert plan.peak_buffers() == unlabeled_rb(g, seq)
        nb = g.goal_neighbors()
        vacated, filled = set(), []
        for a in plan:
            if a.kind in (START_TO_GOAL, START_TO_BUFFER):
                assert a.obj not in vacated
                vacated.add(a.obj)
            if a.kind in (START_TO_GOAL, BUFFER_TO_GOAL):
                assert set(nb[a.goal]) <= vacated
                filled.append(a.goal)
        assert filled == seq


def test_unlabeled_trace_rejects_non_permutation():
    u = seven_discs_unlabeled()
    with pytest.raises(ValueError):
        unlabeled_trace(u, [1, 2, 3])


def test_plan_from_witness_cans():
    g = build_labeled(FX["cans"].instance.start, FX["cans"].instance.goal)
    plans = {tuple(plan_from_witness(g, w).compact()) for w in ([2, 1, 3], [1, 2, 3])}
    assert ("2->b", "1->g", "2->g", "3->g") in plans
    rep = dfdp(g)
    assert tuple(rep.plan.compact()) in {("2->b", "1->g", "2->g", "3->g"),
                                         ("1->b", "2->g", "1->g", "3->g")}


def test_plan_from_witness_seven_discs_and_empty():
    plan = plan_from_witness(seven_discs(), FX["seven_discs"].expected["witness"])
    assert plan.compact() == FX["seven_discs"].expected["plan"]
    assert plan.peak_buffers() == 2
    assert [s for s in (a.slot for a in plan) if s is not None] == [0, 1, 0, 1]
    empty = plan_from_witness(LabeledDepGraph.from_arcs(3, []), [3, 1, 2])
    assert [a.kind for a in empty] == [START_TO_GOAL] * 3


def test_witness_consistency_and_oracle_small():
    for g in labeled_corpus(60, seed=31, nmax=7):
        truth = mrb_labeled_exhaustive(g).value
        for rep in (dp_lrbm(g), dfdp(g)):
            assert rep.mrb == truth
            assert evaluate_ordering(g, rep.ordering).rb == rep.mrb
    for g in bipartite_corpus(60, seed=32, mmax=7):
        truth = mrb_unlabeled_exhaustive(g).value
        for rep in (pqs_urbm(g), dfdp_unlabeled(g)):
            assert rep.mrb == truth
            assert unlabeled_rb(g, rep.ordering) == rep.mrb


def test_mrb_at_most_mfvs():
    for g in labeled_corpus(80, seed=41, nmax=8):
        assert dfdp(g).mrb <= mfvs_exhaustive(g).value


def test_unlabeled_never_worse_than_labeled():
    for seed in range(25):
        inst = random_instance(GeneratorConfig(n=7, rho=0.45, width=20, height=20, seed=seed))
        lab = dfdp(build_labeled(inst.start, inst.goal)).mrb
        unl = pqs_urbm(build_unlabeled(inst.start, inst.goal)).mrb
        assert unl <= lab


def test_report_json():
    rep = dfdp(seven_discs())
    d = json.loads(rep.to_json())
    assert d["schema"] == 1 and d["mrb"] == 2 and "elapsed" in d
    assert "elapsed" not in rep.to_dict(timing=False)
