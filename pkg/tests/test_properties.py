"""Property tests over generated graphs, geometry and instances."""
import math

from hypothesis import given, settings, strategies as st

from rbplan.buffer_mip import build_model, solve_bnb
from rbplan.depgraph import (LabeledDepGraph, UnlabeledDepGraph, evaluate_ordering,
                             vertex_separation)
from rbplan.geometry import ConvexPolygon, Disc, Pose, overlap
from rbplan.instances import GeneratorConfig, instance_from_dict, instance_to_dict, random_instance
from rbplan.oracle import joint_optimum_exhaustive, mfvs_exhaustive, mrb_labeled_exhaustive
from rbplan.tore_solvers import (dfdp, dfdp_unlabeled, dp_lrbm, pqs_urbm, unlabeled_plan,
                                 unlabeled_rb)

from _graphs import replay_unlabeled

PROFILE = settings(derandomize=True, max_examples=60, deadline=None)


@st.composite
def labeled_graphs(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    arcs = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs))) if pairs else set()
    return LabeledDepGraph.from_arcs(n, arcs)


@st.composite
def bipartite_graphs(draw, max_m=6):
    m = draw(st.integers(1, max_m))
    pairs = [(s, g) for s in range(1, m + 1) for g in range(1, m + 1)]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)))
    ids = frozenset(range(1, m + 1))
    return UnlabeledDepGraph(ids, ids, frozenset(edges))


@st.composite
def graph_and_order(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    edges = sorted(draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)))) if pairs else []
    phi = draw(st.permutations(list(range(1, n + 1))))
    return n, edges, phi


@PROFILE
@given(labeled_graphs())
def test_labeled_solvers_agree(g):
    best = mrb_labeled_exhaustive(g).value
    assert dp_lrbm(g).mrb == best
    rep = dfdp(g)
    assert rep.mrb == best
    assert evaluate_ordering(g, rep.ordering).rb == best
    assert best <= mfvs_exhaustive(g).value


@PROFILE
@given(bipartite_graphs())
def test_unlabeled_solvers_agree(g):
    a, b = pqs_urbm(g), dfdp_unlabeled(g)
    assert a.mrb == b.mrb
    plan = unlabeled_plan(g, a.ordering)
    assert plan.peak_buffers() == unlabeled_rb(g, a.ordering) == a.mrb
    assert replay_unlabeled(g, plan) == []


@PROFILE
@given(graph_and_order())
def test_separation_sandwich(case):
    n, edges, phi = case
    g = LabeledDepGraph.bidirectional(n, edges)
    vs = vertex_separation(edges, phi)
    assert vs <= evaluate_ordering(g, phi).rb <= vs + 1


@PROFILE
@given(labeled_graphs(), st.permutations(list(range(1, 7))))
def test_ordering_plan_consistency(g, perm):
    phi = [v for v in perm if v <= g.n]
    ev = evaluate_ordering(g, phi)
    assert ev.plan.peak_buffers() == ev.rb
    assert ev.plan.total_buffers() == ev.total_buffers
    kinds = {}
    for a in ev.plan:
        kinds.setdefault(a.obj, []).append(a.kind)
    assert len(kinds) == g.n


@settings(derandomize=True, max_examples=25, deadline=None)
@given(labeled_graphs(max_n=5), st.sampled_from([(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (2.0, 7.0)]))
def test_bnb_matches_oracle(g, w):
    rep = solve_bnb(build_model(g, *w))
    assert rep.objective == joint_optimum_exhaustive(g, *w).value


coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
shapes = st.one_of(st.floats(0.2, 2.0).map(Disc),
                   st.tuples(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
                   .map(lambda wh: ConvexPolygon.rectangle(*wh)))
poses = st.builds(Pose, coords, coords, st.floats(0, 2 * math.pi))


@PROFILE
@given(shapes, poses, shapes, poses, coords, coords)
def test_overlap_symmetric_and_translation_invariant(fa, pa, fb, pb, dx, dy):
    o = overlap(fa, pa, fb, pb)
    assert o == overlap(fb, pb, fa, pa)
    ta = Pose(pa.x + dx, pa.y + dy, pa.theta)
    tb = Pose(pb.x + dx, pb.y + dy, pb.theta)
    assert overlap(fa, ta, fb, tb) == o


@settings(derandomize=True, max_examples=10, deadline=None)
@given(st.integers(1, 25), st.sampled_from([0.2, 0.3, 0.4]), st.integers(0, 10_000))
def test_instance_round_trip(n, rho, seed):
    inst = random_instance(GeneratorConfig(n, rho, seed=seed))
    d = instance_to_dict(inst)
    assert instance_to_dict(instance_from_dict(d)) == d
    assert abs(inst.density() - rho) <= 0.01 * rho
