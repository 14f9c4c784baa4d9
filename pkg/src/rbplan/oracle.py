"""Exhaustive ground truth for small instances."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Sequence

from .depgraph import (LabeledDepGraph, UnlabeledDepGraph, evaluate_ordering,
                       vertex_separation)
from .tore_solvers import unlabeled_rb


class OracleCapError(ValueError):
    pass


@dataclass
class OracleResult:
    value: object
    witnesses: List = field(default_factory=list)
    enumerated: int = 0


def _check_cap(size, cap, what):
    if size > cap:
        raise OracleCapError(f"{what} oracle capped at {cap}, got {size}")


def _minimize(candidates, score):
    best = None
    wits = []
    count = 0
    for c in candidates:
        count += 1
        v = score(c)
        if best is None or v < best:
            best, wits = v, [c]
        elif v == best:
            wits.append(c)
    return OracleResult(best if best is not None else 0, wits, count)


def mrb_labeled_exhaustive(g: LabeledDepGraph, cap: int = 10) -> OracleResult:
    _check_cap(g.n, cap, "labeled MRB")
    return _minimize(itertools.permutations(g.ids), lambda p: evaluate_ordering(g, p).rb)


def mrb_unlabeled_exhaustive(g: UnlabeledDepGraph, cap: int = 9) -> OracleResult:
    _check_cap(len(g.goals), cap, "unlabeled MRB")
    return _minimize(itertools.permutations(g.goal_ids), lambda p: unlabeled_rb(g, p))


def _acyclic(vertices, arcs) -> bool:
    indeg = {v: 0 for v in vertices}
    succ = {v: [] for v in vertices}
    for i, j in arcs:
        if i in indeg and j in indeg:
            succ[i].append(j)
            indeg[j] += 1
    stack = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == len(indeg)


def mfvs_exhaustive(g: LabeledDepGraph, cap: int = 16) -> OracleResult:
    """Smallest vertex sets whose removal leaves the graph acyclic."""
    _check_cap(g.n, cap, "MFVS")
    count = 0
    for k in range(g.n + 1):
        wits = []
        for fvs in itertools.combinations(g.ids, k):
            count += 1
            rest = set(g.ids) - set(fvs)
            if _acyclic(rest, g.arcs):
                wits.append(frozenset(fvs))
        if wits:
            # every subset no larger than the optimum has been examined
            return OracleResult(k, wits, count)
    raise AssertionError("unreachable: removing every vertex is acyclic")


def min_vertex_separation_exhaustive(vertices: Sequence, edges, cap: int = 9) -> OracleResult:
    vertices = list(vertices)
    _check_cap(len(vertices), cap, "vertex separation")
    edges = list(edges)
    return _minimize(itertools.permutations(vertices), lambda p: vertex_separation(edges, p))


def joint_optimum_exhaustive(g: LabeledDepGraph, alpha: float, beta: float, cap: int = 7) -> OracleResult:
    """Minimum of alpha * total buffers + beta * peak buffers over all orderings.

    ``value`` is the objective; each witness is (ordering, total, peak).
    """
    _check_cap(g.n, cap, "joint objective")
    count = 0
    best = None
    wits = []
    for p in itertools.permutations(g.ids):
        count += 1
        ev = evaluate_ordering(g, p)
        v = alpha * ev.total_buffers + beta * ev.rb
        if best is None or v < best:
            best, wits = v, [(p, ev.total_buffers, ev.rb)]
        elif v == best:
            wits.append((p, ev.total_buffers, ev.rb))
    return OracleResult(best if best is not None else 0, wits, count)
