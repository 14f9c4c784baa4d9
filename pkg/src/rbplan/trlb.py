"""In-place rearrangement with buffers inside the workspace.

A primitive plan decides which objects visit a buffer and in what order, as
if buffers were external. ``allocate_buffers`` then places those buffers
inside the workspace one action at a time, keeping earlier placements while
they stay feasible. When no placement exists the plan is cut before that
action, and the tree planners resume from the arrangement reached.
"""
from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .buffer_mip import BNB_CAP, build_model, solve_bnb
from .depgraph import (LabeledDepGraph, build_labeled, build_unlabeled,
                       condensation_order, evaluate_ordering)
from .geometry import (Arrangement, Disc, Pose, Workspace, contains, overlap,
                       validate_arrangement)
from .plan import BUFFER_TO_GOAL, START_TO_BUFFER
from .tore_solvers import dfdp, pqs_urbm, unlabeled_plan

RBM = "rbm"
TBM = "tbm"
RO = "ro"
SAMPLING = "sampling"
OPTIMIZATION = "optimization"
ONE_SHOT = "os"
FORWARD_TREE = "st"
BIDIRECTIONAL = "bst"

_PLANNER_ALIASES = {"os": ONE_SHOT, "oneshot": ONE_SHOT, "one_shot": ONE_SHOT,
                    "st": FORWARD_TREE, "forward": FORWARD_TREE, "forwardtree": FORWARD_TREE,
                    "bst": BIDIRECTIONAL, "bidirectional": BIDIRECTIONAL}
_BUFFER_ALIASES = {"sp": SAMPLING, "sampling": SAMPLING,
                   "opt": OPTIMIZATION, "optimization": OPTIMIZATION}

SOLVED = "Solved"
TIMED_OUT = "TimedOut"
FAILED = "Failed"
POSE_TOL = 1e-6
OPT_MARGIN = 1e-6


class CollisionCounter:
    def __init__(self):
        self.checks = 0


def _rng(seed):
    return np.random.default_rng(seed)


# ------------------------------------------------------------ primitive plans

@dataclass(frozen=True)
class PrimitiveAction:
    """``goal`` is the goal vertex being filled; None means the object's own."""

    obj: int
    kind: str
    goal: Optional[int] = None

    @property
    def target(self) -> int:
        return self.obj if self.goal is None else self.goal

    def as_tuple(self):
        return (self.obj, self.kind)


@dataclass
class PrimitivePlan:
    actions: List[PrimitiveAction]
    ordering: List[int] = field(default_factory=list)
    mode: str = RBM

    def __len__(self):
        return len(self.actions)

    @property
    def peak(self) -> int:
        cur = peak = 0
        for a in self.actions:
            if a.kind == START_TO_BUFFER:
                cur += 1
                peak = max(peak, cur)
            elif a.kind == BUFFER_TO_GOAL:
                cur -= 1
        return peak

    def buffered(self) -> List[int]:
        return [a.obj for a in self.actions if a.kind == START_TO_BUFFER]


def _from_actions(actions, ordering, mode) -> PrimitivePlan:
    out = []
    for a in actions:
        goal = a.goal if a.goal is not None and a.goal != a.obj else None
        out.append(PrimitiveAction(a.obj, a.kind, goal))
    return PrimitivePlan(out, list(ordering), mode)


def primitive_from_ordering(g: LabeledDepGraph, ordering: Sequence[int], mode: str = "order") -> PrimitivePlan:
    return _from_actions(evaluate_ordering(g, ordering).plan.actions, ordering, mode)


def _min_total_order(g: LabeledDepGraph, time_limit) -> List[int]:
    order: List[int] = []
    for comp in condensation_order(g):
        if len(comp) == 1:
            order.extend(comp)
            continue
        sub = g.subgraph(comp)
        if sub.n <= BNB_CAP:
            # alpha / beta > n - 1 puts total buffers strictly first
            rep = solve_bnb(build_model(sub, float(sub.n), 1.0), time_limit)
            if rep.ordering is not None:
                order.extend(rep.ordering)
                continue
        rep = dfdp(sub, time_limit)
        if rep.ordering is None:
            raise TimeoutError("no ordering found for a strongly connected component")
        order.extend(rep.ordering)
    return order


def primitive_plan(g: LabeledDepGraph, mode: str = RBM, seed=0, time_limit: float = 60.0) -> PrimitivePlan:
    """Primitive actions from a DFDP ordering (rbm), a fewest-total-buffers
    ordering (tbm) or a seeded random permutation (ro)."""
    if mode == RBM:
        rep = dfdp(g, time_limit)
        if rep.ordering is None:
            raise TimeoutError("DFDP timed out while building a primitive plan")
        order = rep.ordering
    elif mode == TBM:
        order = _min_total_order(g, time_limit)
    elif mode == RO:
        order = [int(v) for v in _rng(seed).permutation(list(g.ids))]
    else:
        raise ValueError(f"unknown primitive mode {mode!r}")
    return primitive_from_ordering(g, order, mode)


# ---------------------------------------------------------- buffer generation

Obstacle = Tuple[object, Pose]


def _random_pose(ws: Workspace, fp, rng) -> Pose:
    br = fp.bounding_radius
    lo_x, hi_x = br, max(br, ws.width - br)
    lo_y, hi_y = br, max(br, ws.height - br)
    x = rng.uniform(lo_x, hi_x)
    y = rng.uniform(lo_y, hi_y)
    theta = 0.0 if isinstance(fp, Disc) else rng.uniform(0.0, 2 * math.pi)
    return Pose(x, y, theta)


def _free(fp, p: Pose, ws: Workspace, obstacles: Sequence[Obstacle], counter) -> bool:
    if not contains(ws, fp, p):
        return False
    for ofp, op in obstacles:
        counter.checks += 1
        if overlap(fp, p, ofp, op):
            return False
    return True


def _sample_one(fp, ws, obstacles, rng, max_attempts, counter) -> Optional[Pose]:
    if isinstance(fp, Disc) and all(isinstance(o, Disc) for o, _ in obstacles):
        r = fp.radius
        if 2 * r > ws.width or 2 * r > ws.height:
            return None
        xs = rng.uniform(r, ws.width - r, size=max_attempts)
        ys = rng.uniform(r, ws.height - r, size=max_attempts)
        if not obstacles:
            return Pose(xs[0], ys[0])
        O = np.array([[p.x, p.y] for _, p in obstacles])
        R = np.array([o.radius for o, _ in obstacles]) + r
        d2 = (xs[:, None] - O[None, :, 0]) ** 2 + (ys[:, None] - O[None, :, 1]) ** 2
        ok = np.all(d2 >= R[None, :] ** 2, axis=1)
        hits = np.flatnonzero(ok)
        k = int(hits[0]) if len(hits) else max_attempts - 1
        counter.checks += (k + 1) * len(obstacles)
        if not len(hits):
            return None
        p = Pose(xs[k], ys[k])
        # the exact predicate has the final say
        return p if _free(fp, p, ws, obstacles, CollisionCounter()) else None
    for _ in range(max_attempts):
        p = _random_pose(ws, fp, rng)
        if _free(fp, p, ws, obstacles, counter):
            return p
    return None


def buffer_generation_sampling(constraints: Dict[int, List[Obstacle]], footprints: Dict[int, object],
                               ws: Workspace, seed=0, max_attempts: int = 100,
                               kept: Optional[Dict[int, Pose]] = None,
                               counter: Optional[CollisionCounter] = None) -> Optional[Dict[int, Pose]]:
    """Sample buffers one object at a time, ascending id.

    Each buffer avoids its constraint poses, the ``kept`` buffers and every
    buffer sampled before it. Returns the new poses or None.
    """
    rng = _rng(seed)
    counter = counter or CollisionCounter()
    kept = dict(kept or {})
    out: Dict[int, Pose] = {}
    for o in sorted(constraints):
        fp = footprints[o]
        obs = list(constraints[o])
        obs += [(footprints[k], p) for k, p in kept.items() if k != o]
        obs += [(footprints[k], p) for k, p in out.items()]
        p = _sample_one(fp, ws, obs, rng, max_attempts, counter)
        if p is None:
            return None
        out[o] = p
    return out


def buffer_generation_optimization(constraints: Dict[int, List[Obstacle]], footprints: Dict[int, object],
                                   ws: Workspace, seed=0, iterations: int = 200, restarts: int = 10,
                                   kept: Optional[Dict[int, Pose]] = None,
                                   counter: Optional[CollisionCounter] = None) -> Optional[Dict[int, Pose]]:
    """Place disc buffers by penalty descent on the pairwise distance inequalities.

    Minimizes the sum of max(0, (ri + rj)^2 - d^2)^2 over buffer centres boxed
    inside the workspace, with random restarts. Non-disc inputs fall back to
    sampling.
    """
    counter = counter or CollisionCounter()
    kept = dict(kept or {})
    objs = sorted(constraints)
    if not objs:
        return {}
    allfp = [footprints[o] for o in objs] + [fp for c in constraints.values() for fp, _ in c]
    allfp += [footprints[k] for k in kept]
    if not all(isinstance(fp, Disc) for fp in allfp):
        return buffer_generation_sampling(constraints, footprints, ws, seed, kept=kept, counter=counter)
    rng = _rng(seed)
    k = len(objs)
    rad = np.array([footprints[o].radius for o in objs])
    if np.any(2 * rad > ws.width) or np.any(2 * rad > ws.height):
        return None
    owner, oxy, orr = [], [], []
    for a, o in enumerate(objs):
        obs = list(constraints[o]) + [(footprints[q], p) for q, p in kept.items() if q != o]
        for fp, p in obs:
            owner.append(a)
            oxy.append((p.x, p.y))
            orr.append(fp.radius + rad[a])
    owner = np.array(owner, dtype=int)
    oxy = np.array(oxy, dtype=float).reshape(-1, 2)
    oR2 = (np.array(orr, dtype=float) ** 2) * (1 + OPT_MARGIN)
    ia, ib = np.triu_indices(k, 1)
    pR2 = ((rad[ia] + rad[ib]) ** 2) * (1 + OPT_MARGIN)

    def f(z):
        X = z.reshape(k, 2)
        grad = np.zeros_like(X)
        val = 0.0
        if len(owner):
            diff = X[owner] - oxy
            h = np.maximum(0.0, oR2 - (diff ** 2).sum(axis=1))
            val += float((h ** 2).sum())
            np.add.at(grad, owner, -4.0 * h[:, None] * diff)
        if len(ia):
            diff = X[ia] - X[ib]
            h = np.maximum(0.0, pR2 - (diff ** 2).sum(axis=1))
            val += float((h ** 2).sum())
            g = -4.0 * h[:, None] * diff
            np.add.at(grad, ia, g)
            np.add.at(grad, ib, -g)
        return val, grad.ravel()

    bounds = []
    for r in rad:
        bounds += [(r, ws.width - r), (r, ws.height - r)]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    for _ in range(restarts):
        z0 = rng.uniform(lo, hi)
        res = minimize(f, z0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": iterations})
        X = np.clip(res.x, lo, hi).reshape(k, 2)
        out = {o: Pose(X[a, 0], X[a, 1]) for a, o in enumerate(objs)}
        counter.checks += len(owner) + len(ia)
        if _all_free(out, constraints, footprints, ws, kept):
            return out
    return None


def _all_free(out, constraints, footprints, ws, kept) -> bool:
    c = CollisionCounter()
    placed = dict(kept)
    for o in sorted(out):
        obs = list(constraints[o]) + [(footprints[q], p) for q, p in placed.items() if q != o]
        if not _free(footprints[o], out[o], ws, obs, c):
            return False
        placed[o] = out[o]
    return True


def buffer_generation(buffered: Sequence[int], constraints, footprints, ws, B, method, seed,
                      counter, max_attempts=100):
    """Adopt every old buffer that still satisfies its constraints, regenerate the rest.

    Old buffers are checked in ascending id; each must also avoid the ones
    adopted before it. Returns the full buffer map for ``buffered`` or None.
    """
    kept: Dict[int, Pose] = {}
    redo = []
    for o in sorted(buffered):
        p = B.get(o)
        obs = list(constraints[o]) + [(footprints[q], kept[q]) for q in kept]
        if p is not None and _free(footprints[o], p, ws, obs, counter):
            kept[o] = p
        else:
            redo.append(o)
    if not redo:
        return kept
    sub = {o: constraints[o] for o in redo}
    if method == OPTIMIZATION:
        new = buffer_generation_optimization(sub, footprints, ws, seed, kept=kept, counter=counter)
    else:
        new = buffer_generation_sampling(sub, footprints, ws, seed, max_attempts, kept=kept,
                                         counter=counter)
    if new is None:
        return None
    kept.update(new)
    return kept


@dataclass
class BufferAllocation:
    buffers: Dict[int, Pose]
    terminating_step: Optional[int] = None
    reallocations: int = 0

    @property
    def success(self) -> bool:
        return self.terminating_step is None


def allocate_buffers(pi: PrimitivePlan, A1: Arrangement, A2: Arrangement, method: str = SAMPLING,
                     seed=0, max_attempts: int = 100,
                     counter: Optional[CollisionCounter] = None) -> BufferAllocation:
    """Place buffers for a primitive plan inside the workspace, action by action.

    ``A1`` holds every object's current pose (objects the plan does not move
    are fixed obstacles) and ``A2`` the goal poses looked up by goal vertex.
    A buffer must avoid everything present when its object enters it, every
    goal filled while it is occupied, and every buffer occupied at the same
    time, including ones already vacated. On failure ``terminating_step`` is
    the index of the first action that could not be served and ``buffers``
    is the last feasible assignment.
    """
    rng = _rng(seed)
    counter = counter or CollisionCounter()
    ws = A1.workspace
    fps = {o: A1.footprint(o) for o in A1.ids()}
    cur: Dict[int, Pose] = {o: A1.pose(o) for o in A1.ids()}
    B: Dict[int, Pose] = {}
    for o in sorted(set(pi.buffered())):
        B[o] = _random_pose(ws, fps[o], rng)
    cons: Dict[int, List[Obstacle]] = {}
    buffered: List[int] = []
    realloc = 0
    for step, a in enumerate(pi.actions):
        o = a.obj
        if a.kind == START_TO_BUFFER:
            del cur[o]
            cons[o] = [(fps[k], p) for k, p in sorted(cur.items())]
            buffered.append(o)
        else:
            gp = A2.pose(a.target)
            if a.kind == BUFFER_TO_GOAL:
                buffered.remove(o)
                for q in buffered:
                    cons[q].append((fps[o], B[o]))
            else:
                del cur[o]
            for q in buffered:
                cons[q].append((fps[o], gp))
            cur[o] = gp
        if not buffered:
            continue
        newB = buffer_generation(buffered, cons, fps, ws, B, method, rng, counter, max_attempts)
        if newB is None:
            return BufferAllocation(_entered(pi, step, B), step, realloc)
        for q, p in newB.items():
            if q in B and not (a.kind == START_TO_BUFFER and q == o) and p != B[q]:
                realloc += 1
            B[q] = p
    return BufferAllocation(_entered(pi, len(pi.actions), B), None, realloc)


def _entered(pi, upto, B):
    """Restrict the buffer map to objects that entered a buffer before ``upto``."""
    seen = {a.obj for a in pi.actions[:upto] if a.kind == START_TO_BUFFER}
    return {o: p for o, p in B.items() if o in seen}


# ------------------------------------------------------------- concrete plans

@dataclass(frozen=True)
class ToriAction:
    obj: int
    src: Pose
    dst: Pose

    def reversed(self) -> "ToriAction":
        return ToriAction(self.obj, self.dst, self.src)

    def to_dict(self) -> dict:
        return {"object": self.obj, "from": _pose_dict(self.src), "to": _pose_dict(self.dst)}

    @classmethod
    def from_dict(cls, d) -> "ToriAction":
        return cls(int(d["object"]), _pose_of(d["from"]), _pose_of(d["to"]))


def _pose_dict(p: Pose) -> dict:
    return {"x": p.x, "y": p.y, "theta": p.theta}


def _pose_of(d) -> Pose:
    if isinstance(d, dict):
        return Pose(d["x"], d["y"], d.get("theta", 0.0))
    return Pose(*d)


def realize(pi: PrimitivePlan, alloc: BufferAllocation, A1: Arrangement, A2: Arrangement,
            upto: Optional[int] = None, skip=()) -> Tuple[List[ToriAction], Arrangement]:
    """Concrete moves for the first ``upto`` primitive actions and the arrangement reached."""
    if upto is None:
        upto = len(pi.actions) if alloc.success else alloc.terminating_step
    cur = A1
    out = []
    for k, a in enumerate(pi.actions[:upto]):
        if k in skip:
            continue
        src = cur.pose(a.obj)
        dst = alloc.buffers[a.obj] if a.kind == START_TO_BUFFER else A2.pose(a.target)
        out.append(ToriAction(a.obj, src, dst))
        cur = cur.with_pose(a.obj, dst)
    return out, cur


def validate_plan(A1: Arrangement, A2: Arrangement, actions, labeled: bool = True) -> Tuple[bool, List[str]]:
    """Replay ``actions`` with full collision and containment checks.

    Steps are numbered from 1 in the messages. The plan is valid when no
    step fails and every object ends at its goal (or, unlabeled, every goal
    pose is occupied).
    """
    ws = A1.workspace
    cur = {o: A1.pose(o) for o in A1.ids()}
    fps = {o: A1.footprint(o) for o in A1.ids()}
    bad: List[str] = []
    for k, a in enumerate(actions, 1):
        if isinstance(a, dict):
            a = ToriAction.from_dict(a)
        o = a.obj
        if o not in cur:
            bad.append(f"step {k}: unknown object {o}")
            continue
        if not cur[o].close_to(a.src, POSE_TOL):
            bad.append(f"step {k}: object {o} is not at the pick pose")
        if not contains(ws, fps[o], a.dst):
            bad.append(f"step {k}: object {o} placed outside workspace")
        for j in sorted(cur):
            if j != o and overlap(fps[o], a.dst, fps[j], cur[j]):
                bad.append(f"step {k}: object {o} collides with object {j}")
        cur[o] = a.dst
    if labeled:
        for o in sorted(cur):
            if o not in A2.objects or not cur[o].close_to(A2.pose(o), POSE_TOL):
                bad.append(f"object {o} not at goal")
    else:
        free = sorted(cur)
        for gid in A2.ids():
            hit = next((o for o in free if cur[o].close_to(A2.pose(gid), POSE_TOL)), None)
            if hit is None:
                bad.append(f"goal {gid} not filled")
            else:
                free.remove(hit)
    return not bad, bad


# -------------------------------------------------------------- preprocessing

@dataclass
class PreprocessResult:
    actions: List[ToriAction]
    arrangement: Arrangement
    components: List[List[int]] = field(default_factory=list)
    buffers: int = 0
    complete: bool = True


def _sub(a: Arrangement, ids) -> Arrangement:
    return Arrangement(a.workspace, {o: a.objects[o] for o in ids})


def _moving(cur: Arrangement, goal: Arrangement) -> List[int]:
    return [o for o in cur.ids() if not cur.pose(o).close_to(goal.pose(o), POSE_TOL)]


def residual_graph(cur: Arrangement, goal: Arrangement) -> LabeledDepGraph:
    """Labeled dependency graph from the current poses; objects at goal are isolated."""
    ids = _moving(cur, goal)
    g = build_labeled(_sub(cur, ids), _sub(goal, ids))
    return LabeledDepGraph(tuple(cur.ids()), g.arcs)


def is_simple_cycle(g: LabeledDepGraph, comp: Sequence[int]) -> bool:
    cs = set(comp)
    if len(cs) < 2:
        return False
    outd = {v: 0 for v in cs}
    ind = {v: 0 for v in cs}
    for i, j in g.arcs:
        if i in cs and j in cs:
            outd[i] += 1
            ind[j] += 1
    return all(outd[v] == 1 and ind[v] == 1 for v in cs)


def _closure(g: LabeledDepGraph, comp) -> List[int]:
    adj = g.adjacency()
    seen = set(comp)
    stack = list(comp)
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return sorted(seen)


def uniform_footprints(a: Arrangement) -> bool:
    fps = [fp for fp, _ in a.objects.values()]
    return all(fp == fps[0] for fp in fps)


def preprocess_unlabeled(A1: Arrangement, A2: Arrangement, method: str = SAMPLING, seed=0,
                         tries: int = 10, counter: Optional[CollisionCounter] = None,
                         time_limit: float = 60.0) -> PreprocessResult:
    """Solve every component that is neither a singleton nor a simple cycle as unlabeled.

    Components are handled dependencies first, together with everything they
    depend on, so that the goals being filled are never blocked by objects
    outside the group. Each group is planned by pqs_urbm and its buffers are
    allocated like a primitive plan. A buffered object whose last move would
    take it to another object's goal stays in its buffer when that buffer
    overlaps no goal pose and no buffer is entered after it. Afterwards the
    residual labeled graph has only singletons and simple cycles.
    """
    if not uniform_footprints(A1):
        warnings.warn("preprocessing needs identical footprints; skipped")
        return PreprocessResult([], A1, complete=False)
    rng = _rng(seed)
    counter = counter or CollisionCounter()
    cur = A1
    actions: List[ToriAction] = []
    comps_done: List[List[int]] = []
    nbuf = 0
    goal_obs = [(A2.footprint(o), A2.pose(o)) for o in A2.ids()]
    fp0 = A1.footprint(A1.ids()[0]) if A1.objects else None
    while True:
        g = residual_graph(cur, A2)
        target = next((c for c in condensation_order(g)
                       if len(c) > 1 and not is_simple_cycle(g, c)), None)
        if target is None:
            return PreprocessResult(actions, cur, comps_done, nbuf, True)
        group = _closure(g, target)
        ug = build_unlabeled(_sub(cur, group), _sub(A2, group))
        rep = pqs_urbm(ug, time_limit)
        if rep.ordering is None:
            return PreprocessResult(actions, cur, comps_done, nbuf, False)
        pi = _from_actions(unlabeled_plan(ug, rep.ordering).actions, rep.ordering, "unlabeled")
        last_in = max((k for k, a in enumerate(pi.actions) if a.kind == START_TO_BUFFER), default=-1)
        trailing = [k for k, a in enumerate(pi.actions)
                    if k > last_in and a.kind == BUFFER_TO_GOAL and a.target != a.obj]

        def droppable(al):
            return {k for k in trailing
                    if not any(overlap(fp0, al.buffers[pi.actions[k].obj], ofp, op)
                               for ofp, op in goal_obs)}

        # prefer an allocation where every trailing buffer can stay put
        alloc, first = None, None
        for _ in range(tries):
            al = allocate_buffers(pi, cur, A2, method, rng, counter=counter)
            if not al.success:
                alloc = alloc or al
                continue
            d = droppable(al)
            if first is None:
                first = (al, d)
            if len(d) == len(trailing):
                first = (al, d)
                break
        if first is None:
            part, cur = realize(pi, alloc, cur, A2)
            actions += part
            return PreprocessResult(actions, cur, comps_done, nbuf, False)
        alloc, skip = first
        part, cur = realize(pi, alloc, cur, A2, skip=skip)
        actions += part
        comps_done.append(group)
        nbuf += len(pi.buffered())


# ------------------------------------------------------------------ planners

@dataclass
class TreeNode:
    arrangement: Arrangement
    parent: Optional[int]
    actions: List[ToriAction]


@dataclass
class SearchTree:
    nodes: List[TreeNode]

    @classmethod
    def rooted(cls, a: Arrangement) -> "SearchTree":
        return cls([TreeNode(a, None, [])])

    @property
    def root(self) -> Arrangement:
        return self.nodes[0].arrangement

    def add(self, parent: int, a: Arrangement, actions) -> int:
        self.nodes.append(TreeNode(a, parent, list(actions)))
        return len(self.nodes) - 1

    def path_actions(self, k: int) -> List[ToriAction]:
        chunks = []
        while k is not None:
            node = self.nodes[k]
            chunks.append(node.actions)
            k = node.parent
        return [a for c in reversed(chunks) for a in c]

    def __len__(self):
        return len(self.nodes)


def hamming(a: Arrangement, b: Arrangement) -> int:
    return sum(1 for o in a.ids() if not a.pose(o).close_to(b.pose(o), POSE_TOL))


@dataclass
class TrlbConfig:
    planner: str = BIDIRECTIONAL
    primitive: str = RBM
    buffer: str = SAMPLING
    preprocessing: bool = False
    max_time: float = 60.0
    seed: int = 0
    attempts: Optional[int] = None

    def normalized(self) -> "TrlbConfig":
        planner = _PLANNER_ALIASES.get(str(self.planner).lower())
        buffer = _BUFFER_ALIASES.get(str(self.buffer).lower())
        if planner is None:
            raise ValueError(f"unknown planner {self.planner!r}")
        if buffer is None:
            raise ValueError(f"unknown buffer method {self.buffer!r}")
        if self.primitive not in (RBM, TBM, RO):
            raise ValueError(f"unknown primitive mode {self.primitive!r}")
        return TrlbConfig(planner, self.primitive, buffer, self.preprocessing, self.max_time,
                          self.seed, self.attempts)


@dataclass
class ToriPlan:
    actions: List[ToriAction]
    status: str
    valid: bool = False
    violations: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.actions)

    def to_list(self):
        return [a.to_dict() for a in self.actions]


class _Stepper:
    """One lazy allocation attempt from one arrangement towards another."""

    def __init__(self, cfg: TrlbConfig, rng, counter):
        self.cfg = cfg
        self.rng = rng
        self.counter = counter
        self.calls = 0

    def __call__(self, src: Arrangement, dst: Arrangement, time_left: float):
        self.calls += 1
        ids = _moving(src, dst)
        if not ids:
            return [], src
        g = build_labeled(_sub(src, ids), _sub(dst, ids))
        pi = primitive_plan(g, self.cfg.primitive, self.rng, max(1.0, time_left))
        alloc = allocate_buffers(pi, src, dst, self.cfg.buffer, self.rng, counter=self.counter)
        return realize(pi, alloc, src, dst)


def trlb_solve(A1: Arrangement, A2: Arrangement, config: Optional[TrlbConfig] = None):
    """Plan an in-place rearrangement from ``A1`` to ``A2``.

    Returns (ToriPlan, stats). The plan is validated by replay before return.
    """
    cfg = (config or TrlbConfig()).normalized()
    if set(A1.objects) != set(A2.objects):
        raise ValueError("start and goal arrangements have different object ids")
    for a, what in ((A1, "start"), (A2, "goal")):
        bad = validate_arrangement(a)
        if bad:
            raise ValueError(f"infeasible {what} arrangement: {bad[0]}")
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time
    rng = _rng(cfg.seed)
    counter = CollisionCounter()
    n = len(A1.objects)
    stats = {"planner": cfg.planner, "primitive": cfg.primitive, "buffer": cfg.buffer,
             "preprocessing": cfg.preprocessing, "objects": n}
    prefix: List[ToriAction] = []
    cur = A1
    if cfg.preprocessing and n:
        pre = preprocess_unlabeled(A1, A2, cfg.buffer, rng, counter=counter,
                                   time_limit=cfg.max_time)
        prefix, cur = pre.actions, pre.arrangement
        stats["preprocess_actions"] = len(prefix)
        stats["preprocess_complete"] = pre.complete
    step = _Stepper(cfg, rng, counter)
    body: Optional[List[ToriAction]] = None
    if cur.same_poses(A2):
        body = []
    elif cfg.planner == ONE_SHOT:
        body = _one_shot(cur, A2, step, cfg, n, deadline, stats)
    elif cfg.planner == FORWARD_TREE:
        body = _forward(cur, A2, step, rng, deadline, stats)
    else:
        body = _bidirectional(cur, A2, step, rng, deadline, stats)
    if body is None:
        status = TIMED_OUT if time.perf_counter() >= deadline else FAILED
        plan = ToriPlan(prefix, status)
    else:
        plan = ToriPlan(prefix + body, SOLVED)
        plan.valid, plan.violations = validate_plan(A1, A2, plan.actions)
        if not plan.valid:
            plan.status = FAILED
    stats["status"] = plan.status
    stats["actions"] = len(plan.actions)
    stats["allocation_calls"] = step.calls
    stats["collision_checks"] = counter.checks
    stats["elapsed"] = time.perf_counter() - t0
    return plan, stats


def _one_shot(cur, A2, step, cfg, n, deadline, stats):
    attempts = cfg.attempts if cfg.attempts is not None else 30 * max(n, 1)
    for k in range(attempts):
        if time.perf_counter() >= deadline:
            break
        acts, reached = step(cur, A2, deadline - time.perf_counter())
        stats["attempts"] = k + 1
        if reached.same_poses(A2):
            return acts
    return None


def _forward(cur, A2, step, rng, deadline, stats):
    tree = SearchTree.rooted(cur)
    while time.perf_counter() < deadline:
        k = int(rng.integers(len(tree)))
        acts, reached = step(tree.nodes[k].arrangement, A2, deadline - time.perf_counter())
        stats["tree_sizes"] = [len(tree)]
        if not acts:
            continue
        m = tree.add(k, reached, acts)
        stats["tree_sizes"] = [len(tree)]
        if reached.same_poses(A2):
            return tree.path_actions(m)
    return None


def _nearest(tree: SearchTree, a: Arrangement) -> int:
    best, arg = None, 0
    for k, node in enumerate(tree.nodes):
        d = hamming(node.arrangement, a)
        if best is None or d < best:
            best, arg = d, k
    return arg


def _stitch(fwd: SearchTree, kf: int, bwd: SearchTree, kb: int) -> List[ToriAction]:
    back = bwd.path_actions(kb)
    return fwd.path_actions(kf) + [a.reversed() for a in reversed(back)]


def _bidirectional(cur, A2, step, rng, deadline, stats):
    trees = [SearchTree.rooted(cur), SearchTree.rooted(A2)]
    # trees[0] grows from the start; ``flip`` tells which one currently plays T1
    flip = 0
    it = 0
    while time.perf_counter() < deadline:
        it += 1
        T1, T2 = trees[flip], trees[1 - flip]
        k = int(rng.integers(len(T1)))
        acts, new1 = step(T1.nodes[k].arrangement, T2.root, deadline - time.perf_counter())
        k1 = T1.add(k, new1, acts) if acts else k
        if new1.same_poses(T2.root):
            return _finish(trees, flip, k1, 0, stats, it)
        near = _nearest(T2, new1)
        acts2, new2 = step(T2.nodes[near].arrangement, new1, deadline - time.perf_counter())
        k2 = T2.add(near, new2, acts2) if acts2 else near
        if new2.same_poses(new1):
            return _finish(trees, flip, k1, k2, stats, it)
        flip = 1 - flip
        stats["iterations"] = it
        stats["tree_sizes"] = [len(trees[0]), len(trees[1])]
    return None


def _finish(trees, flip, k1, k2, stats, it):
    stats["iterations"] = it
    stats["tree_sizes"] = [len(trees[0]), len(trees[1])]
    # k1 lives in trees[flip], k2 in the other tree
    if flip == 0:
        return _stitch(trees[0], k1, trees[1], k2)
    return _stitch(trees[0], k2, trees[1], k1)


def plan_to_json(plan: ToriPlan, stats: dict, timing: bool = True, instance: str = "") -> str:
    st = dict(stats)
    if not timing:
        st.pop("elapsed", None)
    d = {"schema": 1, "instance": instance, "status": plan.status, "valid": plan.valid,
         "actions": plan.to_list(), "stats": st}
    return json.dumps(d, indent=2)


def plan_from_json(text: str) -> List[ToriAction]:
    d = json.loads(text)
    return [ToriAction.from_dict(a) for a in d["actions"]]
