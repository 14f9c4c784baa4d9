"""Instance generators, worked fixtures and the instance JSON format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import minimize

from .geometry import (Arrangement, ConvexPolygon, Disc, Pose, Workspace,
                       validate_arrangement)

RANDOM = "random"
IDENTITY = "identity"
UNLABELED = "unlabeled"


class GenerationError(RuntimeError):
    pass


@dataclass
class Instance:
    start: Arrangement
    goal: Arrangement
    labeling: str = RANDOM
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.start.objects)

    @property
    def labeled(self) -> bool:
        return self.labeling != UNLABELED

    def density(self) -> float:
        area = sum(fp.area() for fp, _ in self.start.objects.values())
        return area / self.start.workspace.area()


@dataclass
class GeneratorConfig:
    n: int
    rho: float
    width: float = 100.0
    height: float = 100.0
    seed: int = 0
    labeling: str = RANDOM
    filler_fraction: float = 0.3
    rejection_max_rho: float = 0.35


def disc_radius(n: int, rho: float, width: float, height: float) -> float:
    """Radius giving density rho = n * pi * r^2 / (w * h)."""
    return math.sqrt(rho * width * height / (n * math.pi))


# ------------------------------------------------------------- random discs

def _rejection(radii, width, height, rng, tries=2000):
    pts = np.zeros((len(radii), 2))
    for k, r in enumerate(radii):
        for _ in range(tries):
            p = rng.uniform((r, r), (width - r, height - r))
            if k == 0:
                break
            d2 = ((pts[:k] - p) ** 2).sum(axis=1)
            if np.all(d2 >= (radii[:k] + r) ** 2 * (1 + 1e-9)):
                break
        else:
            return None
        pts[k] = p
    return pts


def overlap_penalty(x, radii, margin=1e-3):
    """Sum of squared pairwise penetrations and its gradient."""
    P = x.reshape(-1, 2)
    diff = P[:, None, :] - P[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2)) + 1e-12
    need = (radii[:, None] + radii[None, :]) * (1 + margin)
    pen = np.maximum(0.0, need - d)
    np.fill_diagonal(pen, 0.0)
    val = 0.5 * (pen ** 2).sum()
    # d/dP_i of 0.5 * sum_j pen_ij^2 over both orderings
    coef = -2.0 * pen / d
    grad = (coef[:, :, None] * diff).sum(axis=1)
    return val, grad.ravel()


def _relax(P, radii, wall, height, iters=300):
    lo = np.repeat(radii, 2)
    bounds = []
    for r in radii:
        bounds.append((r, wall - r))
        bounds.append((r, height - r))
    x0 = np.clip(P.ravel(), [b[0] for b in bounds], [b[1] for b in bounds])
    res = minimize(overlap_penalty, x0, args=(radii,), jac=True, method="L-BFGS-B",
                   bounds=bounds, options={"maxiter": iters, "ftol": 0.0, "gtol": 1e-14})
    del lo
    return res.x.reshape(-1, 2), res.fun


def _squeeze(n, r, width, height, rng, filler_fraction, steps=20):
    """Place at low density in a wider box, then push the right wall in.

    Filler discs of half radius ride along during compression and are
    removed at the end, which leaves irregular gaps like a physical squeeze.
    """
    nf = int(round(filler_fraction * n))
    radii = np.array([r] * n + [0.5 * r] * nf)
    area = float((np.pi * radii ** 2).sum())
    wall0 = max(width, area / (0.3 * height))
    P = None
    for _ in range(20):
        P = _rejection(radii, wall0, height, rng)
        if P is not None:
            break
        wall0 *= 1.2
    if P is None:
        raise GenerationError("squeeze: initial low-density placement failed")
    for wall in np.linspace(wall0, width, steps + 1)[1:]:
        P, _ = _relax(P, radii, wall, height)
    for _ in range(30):
        P, fun = _relax(P, radii, width, height, iters=2000)
        real = P[:n]
        d2 = ((real[:, None, :] - real[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        if fun == 0.0 or np.all(d2 >= (2 * r) ** 2):
            return real
        # shake and retry
        P = P + rng.normal(scale=0.05 * r, size=P.shape)
    raise GenerationError("squeeze: overlaps remain after relaxation")


def _disc_layout(n, r, cfg, rng):
    radii = np.full(n, r)
    if cfg.rho <= cfg.rejection_max_rho:
        for _ in range(20):
            P = _rejection(radii, cfg.width, cfg.height, rng)
            if P is not None:
                return P
    return _squeeze(n, r, cfg.width, cfg.height, rng, cfg.filler_fraction)


def random_instance(cfg: GeneratorConfig) -> Instance:
    """Two independent disc arrangements at density rho with a labeling."""
    if cfg.n < 1:
        raise ValueError("need at least one object")
    if not 0 < cfg.rho < 1:
        raise ValueError("density must lie in (0, 1)")
    rng = np.random.default_rng(cfg.seed)
    r = disc_radius(cfg.n, cfg.rho, cfg.width, cfg.height)
    ws = Workspace(cfg.width, cfg.height)
    S = _disc_layout(cfg.n, r, cfg, rng)
    G = _disc_layout(cfg.n, r, cfg, rng)
    if cfg.labeling == IDENTITY:
        perm = np.arange(cfg.n)
    else:
        perm = rng.permutation(cfg.n)
    disc = Disc(r)
    start = Arrangement(ws, {k + 1: (disc, Pose(*S[k])) for k in range(cfg.n)})
    goal = Arrangement(ws, {k + 1: (disc, Pose(*G[perm[k]])) for k in range(cfg.n)})
    for a in (start, goal):
        bad = validate_arrangement(a)
        if bad:
            raise GenerationError(f"validation: {bad[0]}")
    return Instance(start, goal, cfg.labeling, f"random-n{cfg.n}-rho{cfg.rho}-s{cfg.seed}")


# ------------------------------------------------------------ constructions

def dependency_grid_instance(m: int, r: float = 1.0) -> Instance:
    """Unlabeled discs whose overlap graph is the m x 2m grid.

    Lattice points of pitch 1.9r are coloured like a checkerboard; one colour
    holds starts and the other goals, so only lattice neighbours overlap.
    """
    if m < 2:
        raise ValueError("grid needs m >= 2")
    pitch = 1.9 * r
    cols, rows = m, 2 * m
    ws = Workspace(2 * r + pitch * (cols - 1) + 2 * r, 2 * r + pitch * (rows - 1) + 2 * r)
    disc = Disc(r)
    starts, goals = {}, {}
    for c in range(cols):
        for q in range(rows):
            p = Pose(2 * r + c * pitch, 2 * r + q * pitch)
            if (c + q) % 2 == 0:
                starts[len(starts) + 1] = (disc, p)
            else:
                goals[len(goals) + 1] = (disc, p)
    return Instance(Arrangement(ws, starts), Arrangement(ws, goals), UNLABELED, f"grid-{m}")


def grid_graph_edges(m: int) -> List[Tuple[int, int]]:
    """Expected (start id, goal id) edges of dependency_grid_instance(m)."""
    cols, rows = m, 2 * m
    sid, gid = {}, {}
    for c in range(cols):
        for q in range(rows):
            if (c + q) % 2 == 0:
                sid[(c, q)] = len(sid) + 1
            else:
                gid[(c, q)] = len(gid) + 1
    edges = []
    for (c, q), s in sid.items():
        for dc, dq in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (c + dc, q + dq) in gid:
                edges.append((s, gid[(c + dc, q + dq)]))
    return sorted(edges)


def labeled_cycle_arcs(n: int) -> List[Tuple[int, int]]:
    m = math.isqrt(n)
    if m * m != n:
        raise ValueError("n must be a perfect square")

    def oid(k):
        return k % n + 1

    return sorted({(oid(k), oid(k - 1)) for k in range(n)} | {(oid(k), oid(k + m)) for k in range(n)})


def labeled_cycle_instance(n: int, r: float = 1.0) -> Instance:
    """Discs on a circle where object k depends on k-1 and k+sqrt(n) (mod n).

    Object k (0-based) starts at slot k*(m-1) mod n; its goal sits half a slot
    beyond the start of object k+m, which is adjacent to the start of object k-1.
    """
    m = math.isqrt(n)
    if m * m != n or n < 4:
        raise ValueError("n must be a perfect square >= 4")
    R = 1.1 * r / math.sin(math.pi / n)
    c = R + 2 * r
    ws = Workspace(2 * c, 2 * c)
    disc = Disc(r)

    def at(slot):
        a = 2 * math.pi * slot / n
        return Pose(c + R * math.cos(a), c + R * math.sin(a))

    start, goal = {}, {}
    for k in range(n):
        start[k + 1] = (disc, at((k * (m - 1)) % n))
        goal[k + 1] = (disc, at(((k + m) * (m - 1)) % n + 0.5))
    return Instance(Arrangement(ws, start), Arrangement(ws, goal), IDENTITY, f"cycle-{n}")


def thin_cuboid_instance(n: int, labeling: str = IDENTITY, width: float = 0.5) -> Instance:
    """Horizontal start bars stacked; vertical goal bars side by side across them."""
    if n < 2:
        raise ValueError("need n >= 2")
    length = n + 2.0
    rect = ConvexPolygon.rectangle(length, width)
    margin = 1.0
    size = length + 2 * margin
    ws = Workspace(size, size)
    mid = size / 2
    offs = [(k - (n - 1) / 2) * 1.0 for k in range(n)]
    start = {k + 1: (rect, Pose(mid, mid + offs[k], 0.0)) for k in range(n)}
    goal = {k + 1: (rect, Pose(mid + offs[k], mid, math.pi / 2)) for k in range(n)}
    return Instance(Arrangement(ws, start), Arrangement(ws, goal), labeling, f"cuboid-{n}")


# ----------------------------------------------------------------- fixtures

@dataclass
class Fixture:
    name: str
    instance: Instance
    arcs: List[Tuple[int, int]]
    expected: Dict[str, object] = field(default_factory=dict)


def _disc_instance(ws, coords, r=1.0, labeling=IDENTITY, name=""):
    d = Disc(r)
    start = {k: (d, Pose(*s)) for k, (s, g) in coords.items()}
    goal = {k: (d, Pose(*g)) for k, (s, g) in coords.items()}
    return Instance(Arrangement(ws, start), Arrangement(ws, goal), labeling, name)


# three cans: 1 and 2 swap places, 3's goal covers 1's start
CANS = {
    1: ((7.123, 6.087), (4.648, 6.134)),
    2: ((4.0, 5.212), (6.667, 7.804)),
    3: ((8.412, 10.142), (7.577, 4.5)),
}
CAN_NAMES = {1: "red", 2: "green", 3: "blue"}

SEVEN_DISCS = {
    1: ((7.341, 3.593), (9.599, 3.852)),
    2: ((5.362, 1.5), (5.286, 7.263)),
    3: ((5.031, 3.842), (4.115, 5.216)),
    4: ((8.548, 7.573), (7.621, 7.126)),
    5: ((2.332, 5.125), (6.613, 4.664)),
    6: ((4.38, 5.944), (1.5, 4.395)),
    7: ((6.544, 6.44), (5.625, 1.695)),
}
SEVEN_DISC_ARCS = [(2, 6), (2, 7), (3, 5), (3, 6), (4, 7), (5, 1), (5, 3), (5, 7), (6, 5), (7, 2)]

# start centre x, start centre y, goal centre x, goal centre y; bars 8 x 0.5
TEN_BARS = {
    1: ((25.0, 15.0), (15.0, 26.0)),
    2: ((14.5, 11.0), (14.0, 15.0)),
    3: ((14.0, 21.0), (19.0, 18.0)),
    4: ((18.0, 16.0), (20.0, 12.0)),
    5: ((24.0, 17.0), (9.0, 11.5)),
    6: ((19.0, 13.0), (8.0, 14.5)),
    7: ((7.5, 18.0), (17.0, 16.5)),
    8: ((5.0, 20.0), (16.0, 4.0)),
    9: ((17.0, 12.0), (11.0, 8.5)),
    10: ((22.0, 14.0), (12.0, 22.0)),
}
TEN_BAR_ARCS = [(2, 4), (2, 9), (3, 4), (3, 10), (4, 6), (4, 9), (4, 10), (6, 7), (7, 4), (7, 6),
             (9, 2), (10, 3)]


def _triangle(cx, cy, side=3.6, push=0.5):
    """Starts on a triangle; each goal at the opposite edge midpoint, pushed outward."""
    R = side / math.sqrt(3)
    starts = [(cx + R * math.cos(a), cy + R * math.sin(a))
              for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)]
    coords = {}
    for k in range(3):
        j, l = starts[(k + 1) % 3], starts[(k + 2) % 3]
        mx, my = (j[0] + l[0]) / 2, (j[1] + l[1]) / 2
        dx, dy = mx - cx, my - cy
        d = math.hypot(dx, dy)
        coords[k + 1] = (starts[k], (mx + push * dx / d, my + push * dy / d))
    return coords


def worked_examples() -> Dict[str, Fixture]:
    fx = {}
    cans = _disc_instance(Workspace(14.0, 14.0), CANS, name="cans")
    fx["cans"] = Fixture("cans", cans, [(1, 2), (2, 1), (3, 1)],
                         {"mrb": 1, "mfvs": 1, "plan_length": 4, "names": CAN_NAMES})
    seven_discs = _disc_instance(Workspace(11.099, 9.073), SEVEN_DISCS, name="seven_discs")
    fx["seven_discs"] = Fixture("seven_discs", seven_discs, SEVEN_DISC_ARCS,
                         {"mrb": 2, "mfvs": 2, "fvs": [2, 3],
                          "rb_of": {(1, 5, 6, 3, 4, 2, 7): 3, (5, 6, 2, 7, 4, 3, 1): 2},
                          "last_object": {"subset": [2, 5, 6], "candidates": {2: 2, 5: 3, 6: 2}},
                          "witness": [1, 2, 3, 7, 4, 5, 6],
                          "plan": ["1->g", "2->b", "3->b", "7->g", "4->g", "5->g", "6->g",
                                   "2->g", "3->g"]})
    pairs = {}
    for k in range(3):
        a, b = (3.0 + 6.0 * k, 3.0), (5.2 + 6.0 * k, 3.0)
        pairs[2 * k + 1] = (a, b)
        pairs[2 * k + 2] = (b, a)
    three_swaps = _disc_instance(Workspace(20.0, 6.0), pairs, name="three_swaps")
    fx["three_swaps"] = Fixture("three_swaps", three_swaps, [(1, 2), (2, 1), (3, 4), (4, 3), (5, 6), (6, 5)],
                         {"mrb": 1, "mfvs": 3})
    rect = ConvexPolygon.rectangle(8.0, 0.5)
    ws5 = Workspace(34.0, 34.0)
    s5 = {k: (rect, Pose(s[0] + 1.0, s[1] + 1.0, 0.0)) for k, (s, g) in TEN_BARS.items()}
    g5 = {k: (rect, Pose(g[0] + 1.0, g[1] + 1.0, math.pi / 2)) for k, (s, g) in TEN_BARS.items()}
    ten_bars = Instance(Arrangement(ws5, s5), Arrangement(ws5, g5), IDENTITY, "ten_bars")
    fx["ten_bars"] = Fixture("ten_bars", ten_bars, TEN_BAR_ARCS,
                         {"mrb": 2, "mfvs": 3, "fvs": [7, 9, 10], "total_buffers": 4,
                          "joint_objective": 24,
                          "witness": [1, 10, 8, 4, 5, 3, 6, 7, 2, 9],
                          "plan": ["1->g", "10->b", "8->g", "4->b", "5->g", "3->g", "10->g",
                                   "6->b", "7->g", "6->g", "2->b", "9->g", "2->g", "4->g"]})
    disc_triangle = _disc_instance(Workspace(12.0, 12.0), _triangle(6.0, 6.0), name="disc_triangle")
    fx["disc_triangle"] = Fixture("disc_triangle", disc_triangle, [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j],
                         {"mrb": 2, "primitive_order": [1, 3, 2],
                          "primitive_plan": [(1, "s->b"), (3, "s->b"), (2, "s->g"),
                                             (1, "b->g"), (3, "b->g")]})
    tri = _triangle(7.0, 6.0)
    tri[4] = ((2.0, 2.0), (2.0, 10.0))
    triangle_plus_one = _disc_instance(Workspace(14.0, 12.0), tri, name="triangle_plus_one")
    fx["triangle_plus_one"] = Fixture("triangle_plus_one", triangle_plus_one, [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j],
                         {"mrb": 2, "preprocess_buffers": 1})
    return fx


# ------------------------------------------------------------------- JSON

def _shape_to_json(fp):
    if isinstance(fp, Disc):
        return {"disc": {"r": fp.radius}}
    return {"poly": {"pts": [list(v) for v in fp.vertices]}}


def _shape_from_json(d):
    if "disc" in d:
        return Disc(float(d["disc"]["r"]))
    if "poly" in d:
        return ConvexPolygon(tuple(tuple(map(float, p)) for p in d["poly"]["pts"]))
    raise ValueError(f"unknown shape {d!r}")


def _pose_json(p: Pose):
    return {"x": p.x, "y": p.y, "theta": p.theta}


def instance_to_dict(inst: Instance) -> dict:
    ws = inst.start.workspace
    objs = []
    for k in inst.start.ids():
        fp, p = inst.start.objects[k]
        objs.append({"id": k, "shape": _shape_to_json(fp), "start": _pose_json(p),
                     "goal": _pose_json(inst.goal.pose(k))})
    d = {"schema": 1, "workspace": {"w": ws.width, "h": ws.height}, "objects": objs,
         "labeling": inst.labeling}
    if inst.name:
        d["name"] = inst.name
    return d


def instance_from_dict(d: dict) -> Instance:
    ws = Workspace(float(d["workspace"]["w"]), float(d["workspace"]["h"]))
    start, goal = {}, {}
    for o in d["objects"]:
        k = int(o["id"])
        if k in start:
            raise ValueError(f"duplicate object id {k}")
        fp = _shape_from_json(o["shape"])
        start[k] = (fp, Pose(o["start"]["x"], o["start"]["y"], o["start"].get("theta", 0.0)))
        goal[k] = (fp, Pose(o["goal"]["x"], o["goal"]["y"], o["goal"].get("theta", 0.0)))
    return Instance(Arrangement(ws, start), Arrangement(ws, goal), d.get("labeling", RANDOM),
                    d.get("name", ""))


def save_instance(inst: Instance, path: str) -> None:
    with open(path, "w") as f:
        json.dump(instance_to_dict(inst), f, indent=2)
        f.write("\n")


def load_instance(path: str) -> Instance:
    with open(path) as f:
        return instance_from_dict(json.load(f))
