import math
import warnings

import pytest

from rbplan.depgraph import UnlabeledDepGraph, build_unlabeled
from rbplan.instances import (GeneratorConfig, UNLABELED, dependency_grid_instance,
                              random_instance, thin_cuboid_instance, worked_examples)
from rbplan.sepplan import (BOUND_CONSTANT, SeparatorError, _adjacency, balanced_separator,
                            remove_trivial_goals, sepplan, sepplan_bound, vertex_coords)
from rbplan.tore_solvers import dfdp_unlabeled, unlabeled_plan, unlabeled_rb

from _graphs import replay_geometric, replay_unlabeled


def _path(k):
    """Alternating path s1-g1-s2-g2-... with k vertices."""
    verts = [("s" if i % 2 == 0 else "g", i // 2 + 1) for i in range(k)]
    adj = {v: set() for v in verts}
    for a, b in zip(verts, verts[1:]):
        adj[a].add(b)
        adj[b].add(a)
    return verts, adj


def _check_split(V, adj, split):
    assert split.A | split.B | split.C == set(V)
    assert not (split.A & split.B or split.A & split.C or split.B & split.C)
    assert all(not (adj[u] & split.B) for u in split.A)
    assert len(split.A) <= 2 * len(V) / 3 and len(split.B) <= 2 * len(V) / 3


def test_bound_constant():
    assert BOUND_CONSTANT == pytest.approx(108.9898, abs=1e-4)
    assert sepplan_bound(9) == pytest.approx(3 * BOUND_CONSTANT)


def test_path_separator():
    V, adj = _path(9)
    split = balanced_separator(V, adj)
    _check_split(V, adj, split)
    assert len(split.C) == 1
    assert len(split.A) == len(split.B) == 4


def test_disconnected_halves():
    V1, adj1 = _path(4)
    adj = dict(adj1)
    for v, ns in _path(4)[1].items():
        w = (v[0], v[1] + 10)
        adj[w] = {(u[0], u[1] + 10) for u in ns}
    split = balanced_separator(adj, adj)
    _check_split(list(adj), adj, split)
    assert split.C == set()


def test_grid_separator():
    inst = dependency_grid_instance(4)
    g = build_unlabeled(inst.start, inst.goal)
    adj = _adjacency(g)
    split = balanced_separator(adj, adj, vertex_coords(inst.start, inst.goal))
    _check_split(list(adj), adj, split)
    assert 0 < len(split.C) <= 2 * math.sqrt(2 * 32)


def test_star_split_by_hub():
    hub = ("s", 1)
    adj = {hub: set()}
    for k in range(1, 7):
        adj[("g", k)] = {hub}
        adj[hub].add(("g", k))
    split = balanced_separator(adj, adj)
    _check_split(list(adj), adj, split)
    assert split.C == {hub}


def test_crossing_drawing_rejected():
    inst = thin_cuboid_instance(4, UNLABELED)
    g = build_unlabeled(inst.start, inst.goal)
    with pytest.raises(SeparatorError):
        sepplan(g, inst.start, inst.goal)
    res = sepplan(g, inst.start, inst.goal, check_planar=False)
    assert sorted(res.sequence) == g.goal_ids


def test_remove_trivial_goals():
    star = UnlabeledDepGraph(frozenset({1}), frozenset({1}), frozenset({(1, 1)}))
    prefix, rest = remove_trivial_goals(star)
    assert prefix == [1] and not rest.goals and not rest.starts
    inst = worked_examples()["seven_discs"].instance
    prefix, rest = remove_trivial_goals(build_unlabeled(inst.start, inst.goal))
    assert prefix
    assert all(len([e for e in rest.edges if e[1] == t]) >= 2 for t in rest.goals)
    inst = dependency_grid_instance(3)
    g = build_unlabeled(inst.start, inst.goal)
    prefix, rest = remove_trivial_goals(g)
    assert prefix == [] and rest == g


def test_sepplan_trivial_cases():
    empty = UnlabeledDepGraph(frozenset(), frozenset(), frozenset())
    res = sepplan(empty)
    assert res.sequence == [] and res.peak == 0
    chain = UnlabeledDepGraph(frozenset({1, 2}), frozenset({1, 2}), frozenset({(1, 1), (2, 1), (2, 2)}))
    res = sepplan(chain)
    assert res.sequence == res.prefix and res.peak == 0


def test_sepplan_grids():
    for m in range(2, 7):
        inst = dependency_grid_instance(m)
        g = build_unlabeled(inst.start, inst.goal)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            res = sepplan(g, inst.start, inst.goal)
        assert sorted(res.sequence) == g.goal_ids
        assert res.rb_trace and res.peak == unlabeled_rb(g, res.sequence)
        assert res.peak <= sepplan_bound(len(g.goals))
        plan = unlabeled_plan(g, res.sequence)
        assert replay_unlabeled(g, plan) == []
        assert replay_geometric(inst.start, inst.goal, plan) == []
        for lv in res.levels:
            assert lv.separator <= 2 * math.sqrt(2 * lv.size)
            assert lv.cleared <= 10 * math.sqrt(2 * lv.size)


def test_sepplan_small_grid_against_optimum():
    inst = dependency_grid_instance(3)
    g = build_unlabeled(inst.start, inst.goal)
    res = sepplan(g, inst.start, inst.goal)
    assert dfdp_unlabeled(g).mrb <= res.peak <= dfdp_unlabeled(g).mrb + 3


def test_sepplan_random_discs():
    for seed in range(5):
        inst = random_instance(GeneratorConfig(40, 0.5, seed=seed, labeling=UNLABELED))
        g = build_unlabeled(inst.start, inst.goal)
        res = sepplan(g, inst.start, inst.goal)
        assert sorted(res.sequence) == g.goal_ids
        assert res.peak <= sepplan_bound(40)
        assert replay_geometric(inst.start, inst.goal, unlabeled_plan(g, res.sequence)) == []


def test_trace_csv_and_unpacking():
    inst = dependency_grid_instance(2)
    g = build_unlabeled(inst.start, inst.goal)
    res = sepplan(g, inst.start, inst.goal)
    seq, trace = res
    assert seq == res.sequence and trace == res.rb_trace
    lines = res.trace_csv().splitlines()
    assert lines[0] == "step,occupancy"
    assert len(lines) == len(trace) + 1
    assert lines[1] == f"1,{trace[0]}"
