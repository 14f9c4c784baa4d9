"""Joint total-buffer / running-buffer objective.

``build_model`` instantiates the integer program over ordering variables
y, goal-availability variables g, buffer-occupancy variables b, ever-buffered
indicators B and the running-buffer bound K. ``solve_bnb`` optimizes the same
objective exactly by branch-and-bound over ordering prefixes, and
``export_lp`` writes the model in CPLEX LP text format for external solvers.

One modelling note: K bounds the buffer count measured after each pick has
been flushed, so an object that enters a buffer at the very moment it frees a
buffered object is not double counted. Plan simulation counts that transient,
so the model optimum can be below the plan-semantics optimum on such graphs.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .depgraph import LabeledDepGraph, evaluate_ordering
from .plan import RearrangementPlan

SOLVED = "Solved"
TIMED_OUT = "TimedOut"
HEURISTIC = "NotOptimal"
BNB_CAP = 20


@dataclass
class Constraint:
    name: str
    coeffs: Dict[str, float]
    sense: str  # "<=", ">=", "="
    rhs: float

    def holds(self, x: Dict[str, float], tol: float = 1e-9) -> bool:
        lhs = sum(c * x[v] for v, c in self.coeffs.items())
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class MipModel:
    ids: Tuple[int, ...]
    c: List[List[int]]
    alpha: float
    beta: float
    constraints: List[Constraint] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.ids)

    def y(self, i, j):
        return f"y_{i}_{j}"

    def order_vars(self) -> List[str]:
        return [self.y(a, b) for k, a in enumerate(self.ids) for b in self.ids[k + 1:]]

    def g_vars(self) -> List[str]:
        return [f"g_{a}_{b}" for a in self.ids for b in self.ids]

    def b_vars(self) -> List[str]:
        return [f"b_{a}_{b}" for a in self.ids for b in self.ids]

    def B_vars(self) -> List[str]:
        return [f"B_{a}" for a in self.ids]

    def binaries(self) -> List[str]:
        return self.order_vars() + self.g_vars() + self.b_vars() + self.B_vars()

    def variables(self) -> List[str]:
        return self.binaries() + ["K"]

    def objective(self) -> Dict[str, float]:
        obj = {f"B_{a}": self.alpha for a in self.ids}
        obj["K"] = self.beta
        return obj

    def objective_value(self, x: Dict[str, float]) -> float:
        return sum(c * x[v] for v, c in self.objective().items())

    def violations(self, x: Dict[str, float]) -> List[str]:
        bad = [v for v in self.binaries() if x[v] not in (0, 1)]
        bad += [con.name for con in self.constraints if not con.holds(x)]
        return bad

    def assignment_from_ordering(self, phi: Sequence[int]) -> Dict[str, float]:
        """Values of every variable induced by picking objects in order ``phi``."""
        pos = {o: k for k, o in enumerate(phi)}
        ids = self.ids
        idx = {o: k for k, o in enumerate(ids)}
        x: Dict[str, float] = {}
        for k, a in enumerate(ids):
            for b in ids[k + 1:]:
                x[self.y(a, b)] = 1 if pos[a] < pos[b] else 0
        for a in ids:
            for b in ids:
                # does b still depend on something at its start after a is picked
                blocked = any(self.c[idx[b]][idx[k]] and pos[k] > pos[a] for k in ids)
                x[f"g_{a}_{b}"] = 0 if blocked else 1
                x[f"b_{a}_{b}"] = 1 if (pos[b] <= pos[a] and blocked) else 0
        for b in ids:
            x[f"B_{b}"] = 1 if any(x[f"b_{a}_{b}"] for a in ids) else 0
        x["K"] = max((sum(x[f"b_{a}_{b}"] for b in ids) for a in ids), default=0)
        return x

    def decode_ordering(self, x: Dict[str, float]) -> Optional[List[int]]:
        """Permutation encoded by the y variables, or None if they are not transitive."""
        ids = self.ids
        before = {o: 0 for o in ids}
        for k, a in enumerate(ids):
            for b in ids[k + 1:]:
                if x[self.y(a, b)] >= 0.5:
                    before[b] += 1
                else:
                    before[a] += 1
        if sorted(before.values()) != list(range(self.n)):
            return None
        return sorted(ids, key=lambda o: before[o])


def build_model(g: LabeledDepGraph, alpha: float = 1.0, beta: Optional[float] = None) -> MipModel:
    ids = g.ids
    n = len(ids)
    if beta is None:
        beta = float(n)
    idx = g.index()
    c = [[0] * n for _ in range(n)]
    for i, j in g.arcs:
        c[idx[i]][idx[j]] = 1
    m = MipModel(ids, c, alpha, beta)
    cons = m.constraints
    y = m.y
    # transitivity of the ordering
    for p in range(n):
        for q in range(p + 1, n):
            for r in range(q + 1, n):
                i, j, k = ids[p], ids[q], ids[r]
                coeffs = {y(i, j): 1, y(j, k): 1, y(i, k): -1}
                cons.append(Constraint(f"order_lo_{i}_{j}_{k}", dict(coeffs), ">=", 0))
                cons.append(Constraint(f"order_hi_{i}_{j}_{k}", dict(coeffs), "<=", 1))
    for q, j in enumerate(ids):
        coeffs = {f"B_{j}": n}
        for i in ids:
            coeffs[f"b_{i}_{j}"] = -1
        cons.append(Constraint(f"ever_{j}", coeffs, ">=", 0))
    for i in ids:
        coeffs = {"K": 1}
        for j in ids:
            coeffs[f"b_{i}_{j}"] = -1
        cons.append(Constraint(f"running_{i}", coeffs, ">=", 0))
    # availability: L counts j's dependencies still at start after i is picked, minus C0
    for p, i in enumerate(ids):
        for q, j in enumerate(ids):
            L: Dict[str, float] = {}
            c0 = 0
            for r, k in enumerate(ids):
                if not c[q][r] or r == p:
                    continue
                if r < p:
                    c0 += 1
                    L[y(k, i)] = L.get(y(k, i), 0) - 1
                else:
                    L[y(i, k)] = L.get(y(i, k), 0) + 1
            up = dict(L)
            up[f"g_{i}_{j}"] = n
            cons.append(Constraint(f"avail_up_{i}_{j}", up, "<=", n - c0))
            lo = dict(L)
            lo[f"g_{i}_{j}"] = 1
            cons.append(Constraint(f"avail_lo_{i}_{j}", lo, ">=", 1 - c0))
    # buffer occupancy linking
    for p in range(n):
        for q in range(p + 1, n):
            i, j = ids[p], ids[q]
            a = {f"g_{i}_{j}": 1, y(i, j): 1, f"b_{i}_{j}": 2}
            cons.append(Constraint(f"buf_hi_{i}_{j}", a, "<=", 2))
            a = {f"g_{i}_{j}": 1, y(i, j): 1, f"b_{i}_{j}": 1}
            cons.append(Constraint(f"buf_lo_{i}_{j}", a, ">=", 1))
            a = {f"g_{j}_{i}": 1, y(i, j): -1, f"b_{j}_{i}": 2}
            cons.append(Constraint(f"bufr_hi_{j}_{i}", a, "<=", 1))
            a = {f"g_{j}_{i}": 1, y(i, j): -1, f"b_{j}_{i}": 1}
            cons.append(Constraint(f"bufr_lo_{j}_{i}", a, ">=", 0))
    for i in ids:
        cons.append(Constraint(f"self_{i}", {f"b_{i}_{i}": 1, f"g_{i}_{i}": 1}, "=", 1))
    return m


def _term(coef: float, var: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    if mag == 1:
        body = var
    else:
        body = f"{mag:g} {var}"
    return f"{sign} {body}".strip() if first else f"{sign} {body}"


def _expr(coeffs: Dict[str, float]) -> str:
    parts = []
    for v, c in coeffs.items():
        if c == 0:
            continue
        parts.append(_term(c, v, not parts))
    return " ".join(parts) if parts else "0 K"


def export_lp(model: MipModel) -> str:
    """CPLEX LP text for the model."""
    lines = ["\\ joint total/running buffer model", "Minimize", " obj: " + _expr(model.objective()),
             "Subject To"]
    for con in model.constraints:
        lhs = _expr({v: c for v, c in con.coeffs.items() if c != 0})
        lines.append(f" {con.name}: {lhs} {con.sense} {con.rhs:g}")
    lines.append("Bounds")
    lines.append(f" 0 <= K <= {model.n}")
    lines.append("Binaries")
    binaries = model.binaries()
    for k in range(0, len(binaries), 8):
        lines.append(" " + " ".join(binaries[k:k + 8]))
    lines.append("General")
    lines.append(" K")
    lines.append("End")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------- branch and bound

@dataclass
class JointReport:
    mrb: Optional[int]
    total_buffers: Optional[int]
    ordering: Optional[List[int]]
    objective: Optional[float]
    status: str = SOLVED
    nodes_expanded: int = 0
    elapsed: float = 0.0
    plan: Optional[RearrangementPlan] = None

    def to_dict(self, timing: bool = True) -> dict:
        d = {"schema": 1, "method": "bnb", "status": self.status, "mrb": self.mrb,
             "total_buffers": self.total_buffers, "objective": self.objective,
             "ordering": self.ordering, "nodes": self.nodes_expanded,
             "plan": self.plan.to_list() if self.plan is not None else None}
        if timing:
            d["elapsed"] = self.elapsed
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)


def _greedy_order(out, n):
    """Free moves first, otherwise the lowest index."""
    full = (1 << n) - 1
    S = 0
    order = []
    while S != full:
        outside = full & ~S
        pick = -1
        for i in range(n):
            if not (S >> i) & 1 and not (out[i] & outside & ~(1 << i)):
                pick = i
                break
        if pick < 0:
            pick = next(i for i in range(n) if not (S >> i) & 1)
        order.append(pick)
        S |= 1 << pick
    return order


def solve_bnb(model: MipModel, time_limit: float = 300.0, cap: int = BNB_CAP) -> JointReport:
    """Exact minimum of alpha * total + beta * peak under plan semantics."""
    n = model.n
    if n > cap:
        raise ValueError(f"joint branch-and-bound limited to {cap} objects, got {n}")
    t0 = time.perf_counter()
    deadline = time.perf_counter() + time_limit if time_limit is not None else math.inf
    alpha, beta = model.alpha, model.beta
    out = [0] * n
    for i in range(n):
        for j in range(n):
            if model.c[i][j]:
                out[i] |= 1 << j
    full = (1 << n) - 1
    ids = model.ids

    def score(order_bits):
        ev = evaluate_ordering(_graph(model), [ids[i] for i in order_bits])
        return alpha * ev.total_buffers + beta * ev.rb, ev

    best_order = _greedy_order(out, n)
    best_val, _ = score(best_order)
    memo: Dict[int, List[Tuple[int, int]]] = {}
    nodes = 0
    timed_out = False
    order: List[int] = []

    def dominated(S, tot, peak):
        lst = memo.get(S)
        if lst is None:
            memo[S] = [(tot, peak)]
            return False
        for t, p in lst:
            if t <= tot and p <= peak:
                return True
        lst[:] = [(t, p) for t, p in lst if not (tot <= t and peak <= p)]
        lst.append((tot, peak))
        return False

    def children(S):
        outside = full & ~S
        b = 0
        for i in range(n):
            if (S >> i) & 1 and out[i] & outside:
                b += 1
        for i in range(n):
            if not (S >> i) & 1 and not (out[i] & outside & ~(1 << i)):
                return b, [i], True
        return b, [i for i in range(n) if not (S >> i) & 1], False

    b0, cand0, _ = children(0)
    # stack entries: subset, total, peak, buffered count, candidates, cursor
    stack = [[0, 0, 0, b0, cand0, 0]]
    while stack:
        top = stack[-1]
        S, tot, peak, b, cand, cur = top
        if cur >= len(cand):
            stack.pop()
            if order:
                order.pop()
            continue
        top[5] = cur + 1
        i = cand[cur]
        T = S | (1 << i)
        outside_T = full & ~T
        to_buffer = bool(out[i] & outside_T)
        if to_buffer:
            ntot, npeak = tot + 1, max(peak, b + 1)
        else:
            ntot, npeak = tot, peak
        if alpha * ntot + beta * npeak >= best_val:
            continue
        nodes += 1
        if nodes % 1024 == 0 and time.perf_counter() > deadline:
            timed_out = True
            break
        if T == full:
            best_val = alpha * ntot + beta * npeak
            best_order = order + [i]
            continue
        if dominated(T, ntot, npeak):
            continue
        order.append(i)
        nb, ncand, _ = children(T)
        stack.append([T, ntot, npeak, nb, ncand, 0])

    phi = [ids[i] for i in best_order]
    ev = evaluate_ordering(_graph(model), phi)
    val = alpha * ev.total_buffers + beta * ev.rb
    return JointReport(ev.rb, ev.total_buffers, phi, val, TIMED_OUT if timed_out else SOLVED,
                       nodes, time.perf_counter() - t0, ev.plan)


def _graph(model: MipModel) -> LabeledDepGraph:
    arcs = {(model.ids[i], model.ids[j]) for i in range(model.n) for j in range(model.n) if model.c[i][j]}
    return LabeledDepGraph(model.ids, frozenset(arcs))


def tb_given_mrb(g: LabeledDepGraph, time_limit: float = 300.0, cap: int = BNB_CAP) -> JointReport:
    """Fewest total buffers among plans achieving the minimum running buffer."""
    if g.n <= cap:
        return solve_bnb(build_model(g, 1.0, float(g.n)), time_limit, cap)
    from .tore_solvers import dfdp
    t0 = time.perf_counter()
    rep = dfdp(g, time_limit)
    if rep.ordering is None:
        return JointReport(None, None, None, None, TIMED_OUT, rep.nodes_expanded, rep.elapsed)
    ev = evaluate_ordering(g, rep.ordering)
    return JointReport(ev.rb, ev.total_buffers, rep.ordering, ev.total_buffers + g.n * ev.rb,
                       HEURISTIC, rep.nodes_expanded, time.perf_counter() - t0, ev.plan)
