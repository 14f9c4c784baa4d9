"""Labeled and unlabeled dependency graphs and ordering evaluation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Arrangement, Disc, overlap
from .plan import (BUFFER_TO_GOAL, START_TO_BUFFER, START_TO_GOAL, Action,
                   RearrangementPlan, SlotPool)


@dataclass(frozen=True)
class LabeledDepGraph:
    """Directed graph; arc (i, j) means object i's goal overlaps object j's start."""

    ids: Tuple[int, ...]
    arcs: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        ids = tuple(sorted(self.ids))
        object.__setattr__(self, "ids", ids)
        arcs = frozenset((int(i), int(j)) for i, j in self.arcs)
        known = set(ids)
        for i, j in arcs:
            if i == j:
                raise ValueError(f"self-arc on {i}")
            if i not in known or j not in known:
                raise ValueError(f"arc ({i}, {j}) references unknown vertex")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def from_arcs(cls, n_or_ids, arcs) -> "LabeledDepGraph":
        ids = range(1, n_or_ids + 1) if isinstance(n_or_ids, int) else n_or_ids
        return cls(tuple(ids), frozenset(arcs))

    @classmethod
    def bidirectional(cls, n_or_ids, edges) -> "LabeledDepGraph":
        arcs = set()
        for u, v in edges:
            arcs.add((u, v))
            arcs.add((v, u))
        return cls.from_arcs(n_or_ids, arcs)

    @property
    def n(self) -> int:
        return len(self.ids)

    def successors(self, v: int) -> List[int]:
        return sorted(j for i, j in self.arcs if i == v)

    def adjacency(self) -> Dict[int, List[int]]:
        adj = {v: [] for v in self.ids}
        for i, j in sorted(self.arcs):
            adj[i].append(j)
        return adj

    def index(self) -> Dict[int, int]:
        return {v: k for k, v in enumerate(self.ids)}

    def out_masks(self) -> List[int]:
        """Bitmask of dependencies per vertex, bits indexed by position in ``ids``."""
        idx = self.index()
        masks = [0] * self.n
        for i, j in self.arcs:
            masks[idx[i]] |= 1 << idx[j]
        return masks

    def subgraph(self, vertices: Iterable[int]) -> "LabeledDepGraph":
        vs = set(vertices)
        return LabeledDepGraph(tuple(vs), frozenset((i, j) for i, j in self.arcs if i in vs and j in vs))

    def transpose(self) -> "LabeledDepGraph":
        return LabeledDepGraph(self.ids, frozenset((j, i) for i, j in self.arcs))

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "kind": "labeled", "vertices": list(self.ids),
                           "arcs": sorted([list(a) for a in self.arcs])})

    def to_dot(self) -> str:
        lines = ["digraph G {"]
        lines += [f"  {v};" for v in self.ids]
        lines += [f"  {i} -> {j};" for i, j in sorted(self.arcs)]
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class UnlabeledDepGraph:
    """Bipartite overlap graph between start poses and goal poses.

    Vertices are identified by the object id that owns the pose; edges are
    (start_id, goal_id) pairs.
    """

    starts: FrozenSet[int]
    goals: FrozenSet[int]
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "starts", frozenset(self.starts))
        object.__setattr__(self, "goals", frozenset(self.goals))
        edges = frozenset((int(s), int(g)) for s, g in self.edges)
        for s, g in edges:
            if s not in self.starts or g not in self.goals:
                raise ValueError(f"edge ({s}, {g}) does not join a start and a goal vertex")
        object.__setattr__(self, "edges", edges)

    @property
    def goal_ids(self) -> List[int]:
        return sorted(self.goals)

    @property
    def start_ids(self) -> List[int]:
        return sorted(self.starts)

    def goal_neighbors(self) -> Dict[int, List[int]]:
        nb = {g: [] for g in self.goals}
        for s, g in sorted(self.edges):
            nb[g].append(s)
        return nb

    def start_neighbors(self) -> Dict[int, List[int]]:
        nb = {s: [] for s in self.starts}
        for s, g in sorted(self.edges):
            nb[s].append(g)
        return nb

    def goal_masks(self) -> Tuple[List[int], List[int], List[int]]:
        """(goal ids, start ids, start-neighbour bitmask per goal)."""
        gids, sids = self.goal_ids, self.start_ids
        sidx = {s: k for k, s in enumerate(sids)}
        gidx = {g: k for k, g in enumerate(gids)}
        masks = [0] * len(gids)
        for s, g in self.edges:
            masks[gidx[g]] |= 1 << sidx[s]
        return gids, sids, masks

    def vertices(self) -> List[Tuple[str, int]]:
        return [("s", s) for s in self.start_ids] + [("g", g) for g in self.goal_ids]

    def undirected_edges(self) -> List[Tuple[Tuple[str, int], Tuple[str, int]]]:
        return [(("s", s), ("g", g)) for s, g in sorted(self.edges)]

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "kind": "unlabeled", "starts": self.start_ids,
                           "goals": self.goal_ids, "edges": sorted([list(e) for e in self.edges])})

    def to_dot(self) -> str:
        lines = ["graph G {"]
        lines += [f"  s{s} [shape=circle];" for s in self.start_ids]
        lines += [f"  g{g} [shape=doublecircle];" for g in self.goal_ids]
        lines += [f"  s{s} -- g{g};" for s, g in sorted(self.edges)]
        lines.append("}")
        return "\n".join(lines)


def _all_discs(a: Arrangement) -> bool:
    return all(isinstance(fp, Disc) for fp, _ in a.objects.values())


def overlap_matrix(rows: Arrangement, cols: Arrangement) -> Tuple[List[int], List[int], np.ndarray]:
    """Boolean matrix M[i, j] = body i of ``rows`` overlaps body j of ``cols``."""
    rid, cid = rows.ids(), cols.ids()
    if _all_discs(rows) and _all_discs(cols):
        P = np.array([[rows.pose(i).x, rows.pose(i).y] for i in rid], dtype=float).reshape(-1, 2)
        Q = np.array([[cols.pose(j).x, cols.pose(j).y] for j in cid], dtype=float).reshape(-1, 2)
        rp = np.array([rows.footprint(i).radius for i in rid], dtype=float)
        rq = np.array([cols.footprint(j).radius for j in cid], dtype=float)
        d2 = ((P[:, None, :] - Q[None, :, :]) ** 2).sum(axis=2)
        return rid, cid, d2 < (rp[:, None] + rq[None, :]) ** 2
    M = np.zeros((len(rid), len(cid)), dtype=bool)
    for a, i in enumerate(rid):
        fi, pi = rows.objects[i]
        for b, j in enumerate(cid):
            fj, pj = cols.objects[j]
            M[a, b] = overlap(fi, pi, fj, pj)
    return rid, cid, M


def build_labeled(start: Arrangement, goal: Arrangement) -> LabeledDepGraph:
    if set(start.objects) != set(goal.objects):
        raise ValueError("start and goal arrangements have different object ids")
    gid, sid, M = overlap_matrix(goal, start)
    arcs = {(gid[a], sid[b]) for a, b in zip(*np.nonzero(M)) if gid[a] != sid[b]}
    return LabeledDepGraph(tuple(start.ids()), frozenset(arcs))


def build_unlabeled(start: Arrangement, goal: Arrangement) -> UnlabeledDepGraph:
    if len(start.objects) != len(goal.objects):
        raise ValueError("start and goal arrangements have different sizes")
    sid, gid, M = overlap_matrix(start, goal)
    edges = {(sid[a], gid[b]) for a, b in zip(*np.nonzero(M))}
    return UnlabeledDepGraph(frozenset(sid), frozenset(gid), frozenset(edges))


def scc(g: LabeledDepGraph) -> List[List[int]]:
    """Strongly connected components (iterative Tarjan), sorted by smallest member."""
    adj = g.adjacency()
    index: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on_stack = set()
    stack: List[int] = []
    comps = []
    counter = 0
    for root in g.ids:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = adj[v]
            if k < len(succ):
                work.append((v, k + 1))
                w = succ[k]
                if w not in index:
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sorted(comps, key=lambda c: c[0])


def condensation_order(g: LabeledDepGraph) -> List[List[int]]:
    """SCCs ordered so that every component comes after the ones it depends on."""
    comps = scc(g)
    owner = {v: k for k, c in enumerate(comps) for v in c}
    deps = {k: set() for k in range(len(comps))}
    for i, j in g.arcs:
        if owner[i] != owner[j]:
            deps[owner[i]].add(owner[j])
    order, done = [], set()
    # repeatedly emit the lowest-numbered component whose dependencies are done
    pending = set(range(len(comps)))
    while pending:
        k = min(c for c in pending if deps[c] <= done)
        order.append(comps[k])
        done.add(k)
        pending.discard(k)
    return order


@dataclass
class OrderingEvaluation:
    rb: int
    plan: RearrangementPlan
    vs: Optional[int] = None
    buffered: List[int] = field(default_factory=list)

    @property
    def total_buffers(self) -> int:
        return len(self.buffered)


def evaluate_ordering(g: LabeledDepGraph, phi: Sequence[int], with_vs: bool = False) -> OrderingEvaluation:
    """Simulate picking objects in order ``phi``.

    A picked object goes straight to its goal when nothing it depends on is
    still at its start pose, otherwise to an external buffer. After every pick,
    buffered objects whose dependencies have all been picked go to their goals,
    in ascending id.
    """
    phi = list(phi)
    if sorted(phi) != list(g.ids):
        raise ValueError("ordering is not a permutation of the graph's vertices")
    deps = {v: set(s) for v, s in g.adjacency().items()}
    picked = set()
    buffered: List[int] = []
    ever = []
    pool = SlotPool()
    actions = []
    peak = 0
    for o in phi:
        picked.add(o)
        if deps[o] <= picked:
            actions.append(Action(o, START_TO_GOAL, goal=o))
        else:
            buffered.append(o)
            ever.append(o)
            peak = max(peak, len(buffered))
            actions.append(Action(o, START_TO_BUFFER, slot=pool.take(o)))
        for b in sorted(buffered):
            if deps[b] <= picked:
                buffered.remove(b)
                actions.append(Action(b, BUFFER_TO_GOAL, slot=pool.release(b), goal=b))
    vs = None
    if with_vs:
        vs = vertex_separation(undirected_edges(g), phi)
    return OrderingEvaluation(peak, RearrangementPlan(actions), vs, ever)


def rb_of_ordering(g: LabeledDepGraph, phi: Sequence[int]) -> int:
    return evaluate_ordering(g, phi).rb


def undirected_edges(g: LabeledDepGraph) -> List[Tuple[int, int]]:
    return sorted({(min(i, j), max(i, j)) for i, j in g.arcs})


def separation_profile(edges: Iterable[Tuple], phi: Sequence) -> List[int]:
    """Per-position count of vertices at or left of the cut with an edge crossing it."""
    pos = {v: k for k, v in enumerate(phi)}
    if len(pos) != len(phi):
        raise ValueError("ordering repeats a vertex")
    last = {v: k for k, v in enumerate(phi)}
    for u, v in edges:
        if u not in pos or v not in pos:
            raise ValueError("edge references a vertex missing from the ordering")
        last[u] = max(last[u], pos[v])
        last[v] = max(last[v], pos[u])
    n = len(phi)
    diff = [0] * (n + 1)
    for v, k in pos.items():
        if last[v] > k:
            diff[k] += 1
            diff[last[v]] -= 1
    prof, cur = [], 0
    for k in range(n):
        cur += diff[k]
        prof.append(cur)
    return prof


def vertex_separation(edges: Iterable[Tuple], phi: Sequence) -> int:
    prof = separation_profile(edges, phi)
    return max(prof, default=0)


def max_degree(g: UnlabeledDepGraph) -> int:
    deg: Dict[Tuple[str, int], int] = {}
    for s, g_ in g.edges:
        deg[("s", s)] = deg.get(("s", s), 0) + 1
        deg[("g", g_)] = deg.get(("g", g_), 0) + 1
    return max(deg.values(), default=0)


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def crossing_edges(g: UnlabeledDepGraph, start: Arrangement, goal: Arrangement) -> List[Tuple]:
    """Pairs of centre-to-centre edge segments that properly cross."""
    edges = sorted(g.edges)
    if len(edges) < 2:
        return []
    seg = np.array([[start.pose(s).x, start.pose(s).y, goal.pose(t).x, goal.pose(t).y]
                    for s, t in edges], dtype=float)
    ax, ay, bx, by = seg.T
    # orientation of the other segment's endpoints relative to each segment
    o1 = _orient(ax[:, None], ay[:, None], bx[:, None], by[:, None], ax[None, :], ay[None, :])
    o2 = _orient(ax[:, None], ay[:, None], bx[:, None], by[:, None], bx[None, :], by[None, :])
    scale = 1e-12 * (1.0 + np.abs(seg).max()) ** 2
    proper = ((o1 > scale) & (o2 < -scale)) | ((o1 < -scale) & (o2 > scale))
    cross = proper & proper.T
    s_ids = np.array([e[0] for e in edges])
    g_ids = np.array([e[1] for e in edges])
    shared = (s_ids[:, None] == s_ids[None, :]) | (g_ids[:, None] == g_ids[None, :])
    cross &= ~shared
    iu = np.argwhere(np.triu(cross, 1))
    return [(edges[a], edges[b]) for a, b in iu]


def is_planar_straightline(g: UnlabeledDepGraph, start: Arrangement, goal: Arrangement) -> bool:
    return not crossing_edges(g, start, goal)
