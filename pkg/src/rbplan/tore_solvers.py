"""Exact minimum-running-buffer solvers for external-buffer rearrangement.

Labeled problems are solved by subset DP (``dp_lrbm``) or by depth-first DP
over a fixed buffer budget (``dfdp``); unlabeled problems by the same
budgeted search over goal sets (``dfdp_unlabeled``) or best-first search
(``pqs_urbm``).
"""
from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from . import kernels
from .depgraph import (LabeledDepGraph, UnlabeledDepGraph, condensation_order,
                       evaluate_ordering)
from .plan import (BUFFER_TO_GOAL, START_TO_BUFFER, START_TO_GOAL, Action,
                   RearrangementPlan, SlotPool)

SOLVED = "Solved"
TIMED_OUT = "TimedOut"
DEFAULT_TIME_LIMIT = 300.0
DP_CAP = 28


class CapacityError(ValueError):
    pass


@dataclass
class SolveReport:
    mrb: Optional[int]
    ordering: Optional[List[int]]
    plan: Optional[RearrangementPlan]
    nodes_expanded: int = 0
    elapsed: float = 0.0
    status: str = SOLVED
    method: str = ""
    setting: str = "labeled"
    lower_bound: Optional[int] = None

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "schema": 1,
            "method": self.method,
            "setting": self.setting,
            "status": self.status,
            "mrb": self.mrb,
            "ordering": self.ordering,
            "plan": self.plan.to_list() if self.plan is not None else None,
            "nodes": self.nodes_expanded,
        }
        if self.lower_bound is not None:
            d["lower_bound"] = self.lower_bound
        if timing:
            d["elapsed"] = self.elapsed
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _deadline(time_limit) -> float:
    if time_limit is None or time_limit == math.inf:
        return math.inf
    return time.perf_counter() + float(time_limit)


# ---------------------------------------------------------------- labeled DP

@dataclass(frozen=True)
class DpNode:
    subset: frozenset
    buffered: frozenset
    mrb: int
    parent_last: Optional[int]


class DpTable:
    """Full subset table T[S] for a labeled graph."""

    def __init__(self, g: LabeledDepGraph, cap: int = DP_CAP, force_python: bool = False):
        if g.n > cap:
            raise CapacityError(f"subset DP limited to {cap} objects, got {g.n}")
        self.g = g
        self.out = g.out_masks()
        self.mrb, self.last, self.bcount = kernels.dp_labeled(self.out, force_python)

    def _mask(self, subset) -> int:
        idx = self.g.index()
        m = 0
        for o in subset:
            m |= 1 << idx[o]
        return m

    def buffered(self, subset) -> frozenset:
        S = self._mask(subset)
        full = (1 << self.g.n) - 1
        return frozenset(self.g.ids[i] for i in range(self.g.n)
                         if (S >> i) & 1 and self.out[i] & (full & ~S))

    def node(self, subset) -> DpNode:
        S = self._mask(subset)
        last = None if S == 0 else self.g.ids[int(self.last[S])]
        return DpNode(frozenset(subset), self.buffered(subset), int(self.mrb[S]), last)

    def candidates(self, subset) -> Dict[int, int]:
        """Value of T[S].MRB when each member of S is taken as the last object."""
        S = self._mask(subset)
        full = (1 << self.g.n) - 1
        res = {}
        for i in range(self.g.n):
            if (S >> i) & 1:
                P = S & ~(1 << i)
                tc = 1 if self.out[i] & (full & ~S) else 0
                res[self.g.ids[i]] = max(int(self.mrb[P]), int(self.bcount[P]) + tc)
        return res

    def witness(self) -> List[int]:
        S = (1 << self.g.n) - 1
        rev = []
        while S:
            i = int(self.last[S])
            rev.append(self.g.ids[i])
            S &= ~(1 << i)
        return rev[::-1]


def dp_lrbm(g: LabeledDepGraph, cap: int = DP_CAP, force_python: bool = False) -> SolveReport:
    t0 = time.perf_counter()
    table = DpTable(g, cap, force_python)
    order = table.witness()
    ev = evaluate_ordering(g, order)
    mrb = int(table.mrb[(1 << g.n) - 1])
    assert ev.rb == mrb, "DP witness does not reproduce its value"
    return SolveReport(mrb, order, ev.plan, nodes_expanded=1 << g.n,
                       elapsed=time.perf_counter() - t0, method="dp")


# ------------------------------------------------------------- labeled DFDP

def _dfdp_component(g: LabeledDepGraph, rb: int, deadline: float, force_python: bool):
    """Smallest budget >= rb that admits an ordering of ``g``."""
    out = g.out_masks()
    nodes = 0
    while True:
        order, k, timed_out = kernels.dfdp_labeled_decide(out, rb, deadline, force_python)
        nodes += k
        if timed_out:
            return None, rb, nodes
        if order is not None:
            return [g.ids[i] for i in order], rb, nodes
        rb += 1


def dfdp(g: LabeledDepGraph, time_limit=DEFAULT_TIME_LIMIT, decompose: bool = True,
         force_python: bool = False) -> SolveReport:
    """Budgeted depth-first DP: try RB = 0, 1, ... until an ordering exists.

    With ``decompose`` the strongly connected components are solved one at a
    time, dependencies first; the budget carries over between components
    since the overall value is the maximum over components.
    """
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    comps = condensation_order(g) if decompose else [list(g.ids)]
    rb = 0
    order: List[int] = []
    nodes = 0
    for comp in comps:
        if len(comp) == 1:
            order.extend(comp)
            continue
        sub = g.subgraph(comp) if decompose else g
        part, rb, k = _dfdp_component(sub, rb, deadline, force_python)
        nodes += k
        if part is None:
            return SolveReport(None, None, None, nodes, time.perf_counter() - t0, TIMED_OUT,
                               method="dfdp", lower_bound=rb)
        order.extend(part)
    ev = evaluate_ordering(g, order)
    assert ev.rb == rb, "DFDP witness does not reproduce its value"
    return SolveReport(rb, order, ev.plan, nodes, time.perf_counter() - t0, method="dfdp")


# ---------------------------------------------------------------- unlabeled

def unlabeled_trace(g: UnlabeledDepGraph, seq: Sequence[int]) -> List[int]:
    """Buffer occupancy max(0, |N(G)| - |G|) after each goal in ``seq``."""
    nb = g.goal_neighbors()
    if sorted(seq) != g.goal_ids:
        raise ValueError("goal sequence is not a permutation of the goal vertices")
    seen = set()
    trace = []
    for k, x in enumerate(seq, 1):
        seen.update(nb[x])
        trace.append(max(0, len(seen) - k))
    return trace


def unlabeled_rb(g: UnlabeledDepGraph, seq: Sequence[int]) -> int:
    return max(unlabeled_trace(g, seq), default=0)


def free_goals(g: UnlabeledDepGraph, removed: Sequence[int] = ()) -> List[int]:
    """Goals outside ``removed`` with at most one start not yet cleared by ``removed``."""
    nb = g.goal_neighbors()
    gone = set(removed)
    cleared = set()
    for x in gone:
        cleared.update(nb[x])
    return [x for x in g.goal_ids if x not in gone and len(set(nb[x]) - cleared) <= 1]


def unlabeled_plan(g: UnlabeledDepGraph, seq: Sequence[int]) -> RearrangementPlan:
    """Actions that fill goals in ``seq`` order with peak buffer use unlabeled_rb.

    Goal x is filled by first clearing its still-occupied neighbour starts; all
    but the last go to buffers and the last goes straight into x. When no
    neighbour is left, a buffered object is used, and failing that the next
    start vertex that later goals will need to clear anyway.
    """
    nb = g.goal_neighbors()
    seq = list(seq)
    if sorted(seq) != g.goal_ids:
        raise ValueError("goal sequence is not a permutation of the goal vertices")
    # starts in order of first appearance in a neighbourhood, then the rest
    appear: List[int] = []
    seen = set()
    for x in seq:
        for s in nb[x]:
            if s not in seen:
                seen.add(s)
                appear.append(s)
    appear += [s for s in g.start_ids if s not in seen]
    vacated = set()
    buffered: List[int] = []
    pool = SlotPool()
    actions = []
    nxt = 0
    for x in seq:
        new = [s for s in nb[x] if s not in vacated]
        for s in new[:-1]:
            vacated.add(s)
            buffered.append(s)
            actions.append(Action(s, START_TO_BUFFER, slot=pool.take(s)))
        if new:
            vacated.add(new[-1])
            actions.append(Action(new[-1], START_TO_GOAL, goal=x))
        elif buffered:
            b = min(buffered)
            buffered.remove(b)
            actions.append(Action(b, BUFFER_TO_GOAL, slot=pool.release(b), goal=x))
        else:
            while appear[nxt] in vacated:
                nxt += 1
            s = appear[nxt]
            vacated.add(s)
            actions.append(Action(s, START_TO_GOAL, goal=x))
    return RearrangementPlan(actions)


def dfdp_unlabeled(g: UnlabeledDepGraph, time_limit=DEFAULT_TIME_LIMIT,
                   force_python: bool = False) -> SolveReport:
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    gids, _, masks = g.goal_masks()
    rb = 0
    nodes = 0
    while True:
        order, k, timed_out = kernels.dfdp_unlabeled_decide(masks, rb, deadline, force_python)
        nodes += k
        if timed_out:
            return SolveReport(None, None, None, nodes, time.perf_counter() - t0, TIMED_OUT,
                               method="dfdp", setting="unlabeled", lower_bound=rb)
        if order is not None:
            break
        rb += 1
    seq = [gids[i] for i in order]
    assert unlabeled_rb(g, seq) == rb
    return SolveReport(rb, seq, unlabeled_plan(g, seq), nodes, time.perf_counter() - t0,
                       method="dfdp", setting="unlabeled")


def _settle(masks, m, G, N, out):
    """Remove free goals (<= 1 uncleared neighbour) smallest id first."""
    while True:
        for i in range(m):
            if not (G >> i) & 1:
                rest = masks[i] & ~N
                if rest & (rest - 1) == 0:
                    G |= 1 << i
                    N |= masks[i]
                    out.append(i)
                    break
        else:
            return G, N


def pqs_urbm(g: UnlabeledDepGraph, time_limit=DEFAULT_TIME_LIMIT) -> SolveReport:
    """Best-first search over key nodes (goal sets without free goals)."""
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    gids, _, masks = g.goal_masks()
    m = len(gids)
    full = (1 << m) - 1
    first: List[int] = []
    G0, N0 = _settle(masks, m, 0, 0, first)
    # state -> (mrb, parent state, goals appended on the way in)
    best = {G0: (0, None, first)}
    nmask = {G0: N0}
    heap = [(0, -_popcount(G0), G0)]
    closed = set()
    nodes = 0
    while heap:
        mrb, _, G = heapq.heappop(heap)
        if G in closed:
            continue
        closed.add(G)
        nodes += 1
        if nodes % 256 == 0 and time.perf_counter() > deadline:
            return SolveReport(None, None, None, nodes, time.perf_counter() - t0, TIMED_OUT,
                               method="pqs", setting="unlabeled", lower_bound=mrb)
        if G == full:
            break
        N = nmask[G]
        ng = _popcount(G) + 1
        for x in range(m):
            if (G >> x) & 1:
                continue
            N2 = N | masks[x]
            c = max(mrb, _popcount(N2) - ng)
            added = [x]
            G3, N3 = _settle(masks, m, G | (1 << x), N2, added)
            if G3 in closed:
                continue
            prev = best.get(G3)
            if prev is None or c < prev[0]:
                best[G3] = (c, G, added)
                nmask[G3] = N3
                heapq.heappush(heap, (c, -_popcount(G3), G3))
    seq_bits: List[int] = []
    G = full
    while G is not None:
        _, parent, added = best[G]
        seq_bits[:0] = added
        G = parent
    seq = [gids[i] for i in seq_bits]
    mrb = best[full][0]
    assert unlabeled_rb(g, seq) == mrb
    return SolveReport(mrb, seq, unlabeled_plan(g, seq), nodes, time.perf_counter() - t0,
                       method="pqs", setting="unlabeled")


def plan_from_witness(g, witness: Sequence[int]) -> RearrangementPlan:
    """Explicit action list for a labeled ordering or an unlabeled goal sequence."""
    if isinstance(g, UnlabeledDepGraph):
        return unlabeled_plan(g, witness)
    return evaluate_ordering(g, witness).plan
