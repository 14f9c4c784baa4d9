"""Separator-based unlabeled planner with an O(sqrt(n)) running-buffer bound.

The goal sequence is built recursively: strip goals that can be filled for
free, split the remaining overlap graph with a balanced separator C, clear C
(its starts and the starts overlapping its goals), emit its goals, then
recurse into the two sides, the side with the larger goal surplus first.
"""
from __future__ import annotations

import io
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .depgraph import UnlabeledDepGraph, crossing_edges
from .geometry import Arrangement
from .tore_solvers import unlabeled_trace

Vertex = Tuple[str, int]

BOUND_CONSTANT = 20.0 / (1.0 - math.sqrt(2.0 / 3.0))


class SeparatorError(ValueError):
    pass


@dataclass
class SeparatorSplit:
    A: Set[Vertex]
    B: Set[Vertex]
    C: Set[Vertex]


@dataclass
class LevelRecord:
    size: int
    separator: int
    cleared: int


@dataclass
class SepPlanResult:
    sequence: List[int]
    rb_trace: List[int]
    levels: List[LevelRecord] = field(default_factory=list)
    prefix: List[int] = field(default_factory=list)

    @property
    def peak(self) -> int:
        return max(self.rb_trace, default=0)

    def __iter__(self):
        # allows ``seq, trace = sepplan(...)``
        return iter((self.sequence, self.rb_trace))

    def trace_csv(self) -> str:
        out = io.StringIO()
        out.write("step,occupancy\n")
        for k, v in enumerate(self.rb_trace, 1):
            out.write(f"{k},{v}\n")
        return out.getvalue()


def sepplan_bound(n: int) -> float:
    return BOUND_CONSTANT * math.sqrt(n)


def _adjacency(g: UnlabeledDepGraph) -> Dict[Vertex, Set[Vertex]]:
    adj: Dict[Vertex, Set[Vertex]] = {v: set() for v in g.vertices()}
    for s, t in g.edges:
        adj[("s", s)].add(("g", t))
        adj[("g", t)].add(("s", s))
    return adj


def _strip_trivial(V: Set[Vertex], adj) -> List[int]:
    """Remove goals with <= 1 neighbour in V (and that neighbour), smallest id first."""
    out = []
    while True:
        cands = [v for v in V if v[0] == "g" and len(adj[v] & V) <= 1]
        if not cands:
            return out
        v = min(cands)
        V.discard(v)
        V.difference_update(adj[v])
        out.append(v[1])


def remove_trivial_goals(g: UnlabeledDepGraph) -> Tuple[List[int], UnlabeledDepGraph]:
    """Prefix of goals fillable without buffers, and the graph left afterwards."""
    adj = _adjacency(g)
    V = set(adj)
    prefix = _strip_trivial(V, adj)
    starts = frozenset(v[1] for v in V if v[0] == "s")
    goals = frozenset(v[1] for v in V if v[0] == "g")
    edges = frozenset((s, t) for s, t in g.edges if s in starts and t in goals)
    return prefix, UnlabeledDepGraph(starts, goals, edges)


def _components(V: Set[Vertex], adj) -> List[List[Vertex]]:
    seen = set()
    comps = []
    for v in sorted(V):
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        q = deque([v])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w in V and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    q.append(w)
        comps.append(comp)
    return comps


def _split(V: Set[Vertex], C: Set[Vertex], adj) -> Tuple[Set[Vertex], Set[Vertex]]:
    """Distribute components of V - C onto two sides, largest first onto the lighter side."""
    comps = _components(V - C, adj)
    comps.sort(key=lambda c: (-len(c), min(c)))
    A: Set[Vertex] = set()
    B: Set[Vertex] = set()
    for comp in comps:
        (A if len(A) <= len(B) else B).update(comp)
    return A, B


def _bfs_levels(V: Set[Vertex], adj, root: Vertex) -> List[Set[Vertex]]:
    dist = {root: 0}
    q = deque([root])
    levels: List[Set[Vertex]] = [{root}]
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w in V and w not in dist:
                dist[w] = dist[u] + 1
                if dist[w] == len(levels):
                    levels.append(set())
                levels[dist[w]].add(w)
                q.append(w)
    return levels


def _line_cuts(V: Set[Vertex], adj, coords, axis: int) -> List[Set[Vertex]]:
    """Rank cuts near the median along one axis; C is the low side of crossing edges."""
    order = sorted(V, key=lambda v: (coords[v][axis], coords[v][1 - axis], v))
    n = len(order)
    rank = {v: k for k, v in enumerate(order)}
    cuts = []
    for frac in (0.5, 0.45, 0.55, 0.4, 0.6, 1 / 3 + 1e-9, 2 / 3 - 1e-9):
        k = int(n * frac)
        C = {u for u in V if rank[u] < k and any(w in V and rank[w] >= k for w in adj[u])}
        cuts.append(C)
    return cuts


def balanced_separator(V: Iterable[Vertex], adj, coords=None) -> SeparatorSplit:
    """Partition V into A, B, C with no A-B edge and |A|, |B| <= 2|V|/3.

    Candidates are the empty set, every BFS level from several roots and,
    when coordinates are available, rank cuts along both axes. The valid
    candidate with the smallest C wins; ties go to the better balance.
    """
    V = set(V)
    n = len(V)
    if n == 0:
        return SeparatorSplit(set(), set(), set())
    limit = 2.0 * n / 3.0
    cands: List[Set[Vertex]] = [set()]
    comps = _components(V, adj)
    big = max(comps, key=len)
    roots = [min(big)]
    far = _bfs_levels(V, adj, roots[0])[-1]
    roots.append(min(far))
    if coords is not None:
        for axis in (0, 1):
            roots.append(min(big, key=lambda v: (coords[v][axis], v)))
            roots.append(max(big, key=lambda v: (coords[v][axis], v)))
    for root in dict.fromkeys(roots):
        cands.extend(_bfs_levels(V, adj, root))
    if coords is not None:
        cands.extend(_line_cuts(V, adj, coords, 0))
        cands.extend(_line_cuts(V, adj, coords, 1))
    best = None
    for C in cands:
        A, B = _split(V, C, adj)
        if len(A) > limit or len(B) > limit:
            continue
        key = (len(C), abs(len(A) - len(B)))
        if best is None or key < best[0]:
            best = (key, A, B, C)
    if best is None:
        raise SeparatorError("no balanced separator found; vertex coordinates are required")
    _, A, B, C = best
    for u in A:
        if adj[u] & B:
            raise AssertionError("separator leaves an edge between A and B")
    return SeparatorSplit(A, B, set(C))


def vertex_coords(start: Arrangement, goal: Arrangement) -> Dict[Vertex, Tuple[float, float]]:
    c = {("s", k): (start.pose(k).x, start.pose(k).y) for k in start.ids()}
    c.update({("g", k): (goal.pose(k).x, goal.pose(k).y) for k in goal.ids()})
    return c


def sepplan(g: UnlabeledDepGraph, start: Optional[Arrangement] = None,
            goal: Optional[Arrangement] = None, coords=None,
            check_planar: bool = True) -> SepPlanResult:
    """Goal sequence from recursive separation, with its occupancy trace."""
    if coords is None and start is not None and goal is not None:
        coords = vertex_coords(start, goal)
        if check_planar and crossing_edges(g, start, goal):
            raise SeparatorError("dependency graph drawing has crossing edges")
    adj = _adjacency(g)
    seq: List[int] = []
    levels: List[LevelRecord] = []
    V0 = set(adj)
    prefix = _strip_trivial(V0, adj)
    seq.extend(prefix)
    stack = [V0]
    # explicit stack; the side to handle first is pushed last
    while stack:
        V = stack.pop()
        seq.extend(_strip_trivial(V, adj))
        if not any(v[0] == "g" for v in V):
            continue
        size = len(V)
        split = balanced_separator(V, adj, coords)
        limit = 2.0 * size / 3.0
        assert len(split.A) <= limit and len(split.B) <= limit
        C = split.C
        goals_c = sorted(v for v in C if v[0] == "g")
        cleared = {v for v in C if v[0] == "s"}
        for v in goals_c:
            cleared |= adj[v] & V
        if len(C) > 2 * math.sqrt(2 * size):
            warnings.warn(f"separator of size {len(C)} exceeds 2*sqrt(2*{size})")
        levels.append(LevelRecord(size, len(C), len(cleared)))
        seq.extend(v[1] for v in goals_c)
        gone = set(C) | cleared
        sides = [split.A - gone, split.B - gone]

        def delta(side):
            return sum(1 for v in side if v[0] == "g") - sum(1 for v in side if v[0] == "s")

        # larger delta first, tie: smaller side first
        sides.sort(key=lambda s: (-delta(s), len(s)))
        for side in reversed(sides):
            if side:
                stack.append(side)
    trace = unlabeled_trace(g, seq)
    return SepPlanResult(seq, trace, levels, prefix)
