import itertools
import json
import random

import networkx as nx
import pytest

from rbplan.depgraph import (LabeledDepGraph, UnlabeledDepGraph, build_labeled, build_unlabeled,
                             condensation_order, crossing_edges, evaluate_ordering,
                             is_planar_straightline, max_degree, rb_of_ordering, scc,
                             separation_profile, undirected_edges, vertex_separation)
from rbplan.geometry import Arrangement, Disc, Pose, Workspace
from rbplan.instances import dependency_grid_instance, grid_graph_edges, worked_examples
from rbplan.plan import BUFFER_TO_GOAL, START_TO_BUFFER, START_TO_GOAL

from _graphs import complete, labeled_corpus

FX = worked_examples()


def seven_discs_graph():
    return LabeledDepGraph.from_arcs(7, FX["seven_discs"].arcs)


def test_fixture_graphs_match_stored_arcs():
    for name, fx in FX.items():
        g = build_labeled(fx.instance.start, fx.instance.goal)
        assert sorted(g.arcs) == sorted(fx.arcs), name


def test_cans_has_swap_cycle():
    g = build_labeled(FX["cans"].instance.start, FX["cans"].instance.goal)
    assert (1, 2) in g.arcs and (2, 1) in g.arcs
    assert [c for c in scc(g) if len(c) > 1] == [[1, 2]]


def test_seven_discs_two_cycles():
    g = seven_discs_graph()
    for a, b in ((2, 7), (3, 5)):
        assert (a, b) in g.arcs and (b, a) in g.arcs


def test_identical_arrangements_give_no_arcs():
    a = FX["seven_discs"].instance.start
    assert build_labeled(a, a).arcs == frozenset()


def test_mismatched_ids_rejected():
    ws = Workspace(10, 10)
    a = Arrangement(ws, {1: (Disc(1), Pose(2, 2))})
    b = Arrangement(ws, {2: (Disc(1), Pose(2, 2))})
    with pytest.raises(ValueError):
        build_labeled(a, b)


def test_bad_arcs_rejected():
    with pytest.raises(ValueError):
        LabeledDepGraph.from_arcs(2, [(1, 1)])
    with pytest.raises(ValueError):
        LabeledDepGraph.from_arcs(2, [(1, 3)])
    with pytest.raises(ValueError):
        UnlabeledDepGraph(frozenset({1}), frozenset({1}), frozenset({(2, 1)}))


def test_seven_discs_unlabeled_neighbourhoods():
    inst = FX["seven_discs"].instance
    g = build_unlabeled(inst.start, inst.goal)
    assert g.goal_neighbors() == {1: [], 2: [6, 7], 3: [3, 5, 6], 4: [4, 7], 5: [1, 3, 7],
                                  6: [5], 7: [2]}
    assert is_planar_straightline(g, inst.start, inst.goal)
    assert max_degree(g) == 3


def test_disjoint_supports_edgeless():
    ws = Workspace(20, 20)
    s = Arrangement(ws, {1: (Disc(1), Pose(2, 2)), 2: (Disc(1), Pose(6, 2))})
    t = Arrangement(ws, {1: (Disc(1), Pose(2, 12)), 2: (Disc(1), Pose(6, 12))})
    assert build_unlabeled(s, t).edges == frozenset()


def test_grid_generator_is_grid():
    for m in (2, 3, 4):
        inst = dependency_grid_instance(m)
        g = build_unlabeled(inst.start, inst.goal)
        assert sorted(g.edges) == grid_graph_edges(m)


def _reach(g):
    adj = g.adjacency()
    out = {}
    for v in g.ids:
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out[v] = seen
    return out


def test_scc_seven_discs_matches_reachability_closure():
    g = seven_discs_graph()
    r = _reach(g)
    expect = sorted({tuple(sorted(u for u in g.ids if u in r[v] and v in r[u])) for v in g.ids})
    assert sorted(tuple(c) for c in scc(g)) == expect
    assert scc(g) == [[1], [2, 3, 5, 6, 7], [4]]


def test_scc_simple_cases():
    dag = LabeledDepGraph.from_arcs(4, [(1, 2), (2, 3), (1, 4)])
    assert scc(dag) == [[1], [2], [3], [4]]
    assert scc(complete(3)) == [[1, 2, 3]]


def test_scc_matches_networkx():
    for g in labeled_corpus(150, seed=5, nmax=12):
        G = nx.DiGraph()
        G.add_nodes_from(g.ids)
        G.add_edges_from(g.arcs)
        expect = sorted(sorted(c) for c in nx.strongly_connected_components(G))
        assert scc(g) == expect


def test_condensation_order_dependencies_first():
    for g in labeled_corpus(100, seed=6, nmax=10):
        comps = condensation_order(g)
        pos = {v: k for k, c in enumerate(comps) for v in c}
        for i, j in g.arcs:
            assert pos[j] <= pos[i]


def test_evaluate_ordering_seven_discs():
    g = seven_discs_graph()
    assert rb_of_ordering(g, (1, 5, 6, 3, 4, 2, 7)) == 3
    assert rb_of_ordering(g, (5, 6, 2, 7, 4, 3, 1)) == 2
    ev = evaluate_ordering(g, FX["seven_discs"].expected["witness"])
    assert ev.plan.compact() == FX["seven_discs"].expected["plan"]


def test_evaluate_ordering_edgeless_and_errors():
    g = LabeledDepGraph.from_arcs(4, [])
    assert evaluate_ordering(g, [3, 1, 4, 2]).rb == 0
    with pytest.raises(ValueError):
        evaluate_ordering(g, [1, 2, 3])
    with pytest.raises(ValueError):
        evaluate_ordering(g, [1, 1, 2, 3])


def test_evaluate_ordering_plan_semantics():
    rng = random.Random(2)
    for g in labeled_corpus(80, seed=8, nmax=8):
        phi = list(g.ids)
        rng.shuffle(phi)
        ev = evaluate_ordering(g, phi)
        deps = g.adjacency()
        left = set()
        done = []
        cur = peak = 0
        for a in ev.plan:
            if a.kind in (START_TO_GOAL, START_TO_BUFFER):
                assert a.obj not in left
                left.add(a.obj)
            if a.kind in (START_TO_GOAL, BUFFER_TO_GOAL):
                assert set(deps[a.obj]) <= left
                done.append(a.obj)
            if a.kind == START_TO_BUFFER:
                cur += 1
                peak = max(peak, cur)
            elif a.kind == BUFFER_TO_GOAL:
                cur -= 1
        assert sorted(done) == list(g.ids)
        assert peak == ev.rb == ev.plan.peak_buffers()


def test_vertex_separation_examples():
    assert vertex_separation([], [1, 2, 3]) == 0
    k3 = [(1, 2), (1, 3), (2, 3)]
    assert {vertex_separation(k3, p) for p in itertools.permutations([1, 2, 3])} == {2}
    p4 = [(1, 2), (2, 3), (3, 4)]
    assert vertex_separation(p4, [1, 2, 3, 4]) == 1
    # a vertex whose neighbours lie further right stays counted until its last one
    star = [(1, 2), (1, 3), (1, 4)]
    assert separation_profile(star, [1, 2, 3, 4]) == [1, 1, 1, 0]
    with pytest.raises(ValueError):
        separation_profile([(1, 9)], [1, 2])


def test_transpose_when_roles_swap():
    for name in ("cans", "seven_discs", "ten_bars"):
        inst = FX[name].instance
        fwd = build_labeled(inst.start, inst.goal)
        back = build_labeled(inst.goal, inst.start)
        assert back.arcs == fwd.transpose().arcs


def test_planarity_detects_crossing():
    ws = Workspace(20, 20)
    d = Disc(1.5)
    s = Arrangement(ws, {1: (d, Pose(5, 5)), 2: (d, Pose(5, 7.2))})
    t = Arrangement(ws, {1: (d, Pose(6.5, 7.2)), 2: (d, Pose(6.5, 5))})
    g = build_unlabeled(s, t)
    assert crossing_edges(g, s, t)
    assert not is_planar_straightline(g, s, t)
    one = UnlabeledDepGraph(frozenset({1}), frozenset({1}), frozenset({(1, 1)}))
    s1 = Arrangement(ws, {1: (Disc(1), Pose(2, 2))})
    t1 = Arrangement(ws, {1: (Disc(1), Pose(3, 2))})
    assert max_degree(one) == 1 and is_planar_straightline(one, s1, t1)


def test_exports():
    g = seven_discs_graph()
    d = json.loads(g.to_json())
    assert d["schema"] == 1 and len(d["arcs"]) == len(g.arcs)
    assert "2 -> 7;" in g.to_dot()
    inst = FX["seven_discs"].instance
    u = build_unlabeled(inst.start, inst.goal)
    assert json.loads(u.to_json())["kind"] == "unlabeled"
    assert "s6 -- g2;" in u.to_dot()
    assert undirected_edges(LabeledDepGraph.from_arcs(2, [(1, 2), (2, 1)])) == [(1, 2)]
