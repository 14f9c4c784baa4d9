"""Find thin-cuboid poses realizing a target labeled dependency graph.

Starts are horizontal bars on distinct rows, goals vertical bars on distinct
columns, so bars of one arrangement never overlap each other. Goal i crosses
start j iff column(i) lies in start j's x-extent and row(j) lies in goal i's
y-extent. Simulated annealing over rows, columns and bar centres; the result
is confirmed by rebuilding the graph from the geometry.
"""
import math
import random
import sys

from rbplan.depgraph import build_labeled
from rbplan.geometry import Arrangement, ConvexPolygon, Pose, Workspace

LENGTH, WIDTH = 8.0, 0.5
SLOTS = 14


def graph_of(state, ids):
    row, col, sx, gy = state
    half = LENGTH / 2 + WIDTH / 2
    arcs = set()
    for i in ids:
        for j in ids:
            if i != j and abs(col[i] - sx[j]) < half and abs(row[j] - gy[i]) < half:
                arcs.add((i, j))
    return arcs


def cost(state, ids, target):
    return len(graph_of(state, ids) ^ target)


def anneal(ids, target, seed, iters=40000):
    rng = random.Random(seed)
    rows = rng.sample(range(SLOTS), len(ids))
    cols = rng.sample(range(SLOTS), len(ids))
    row = dict(zip(ids, rows))
    col = dict(zip(ids, cols))
    sx = {i: rng.randrange(2 * SLOTS) / 2 + 0.0 for i in ids}
    gy = {i: rng.randrange(2 * SLOTS) / 2 + 0.0 for i in ids}
    state = (row, col, sx, gy)
    cur = cost(state, ids, target)
    temp = 2.0
    for it in range(iters):
        if cur == 0:
            return state
        kind = rng.randrange(4)
        i = rng.choice(ids)
        d = state[kind]
        old = dict(d)
        if kind < 2:
            free = [s for s in range(SLOTS) if s not in d.values()]
            if free and rng.random() < 0.5:
                d[i] = rng.choice(free)
            else:
                j = rng.choice(ids)
                d[i], d[j] = d[j], d[i]
        else:
            d[i] = min(max(d[i] + rng.choice([-1.5, -1, -0.5, 0.5, 1, 1.5]), -4), SLOTS + 4)
        new = cost(state, ids, target)
        if new <= cur or rng.random() < math.exp((cur - new) / temp):
            cur = new
        else:
            d.clear()
            d.update(old)
        temp = max(0.05, temp * 0.9997)
    return state if cur == 0 else None


def to_arrangements(state, ids):
    row, col, sx, gy = state
    rect = ConvexPolygon.rectangle(LENGTH, WIDTH)
    off = LENGTH  # keep everything inside a positive workspace
    ws = Workspace(SLOTS + 2 * off, SLOTS + 2 * off)
    A1 = Arrangement(ws, {i: (rect, Pose(sx[i] + off, row[i] + off, 0.0)) for i in ids})
    A2 = Arrangement(ws, {i: (rect, Pose(col[i] + off, gy[i] + off, math.pi / 2)) for i in ids})
    return A1, A2


def realize(ids, arcs, seeds=range(50)):
    target = set(arcs)
    for seed in seeds:
        st = anneal(list(ids), target, seed)
        if st is None:
            continue
        A1, A2 = to_arrangements(st, list(ids))
        got = build_labeled(A1, A2).arcs
        if set(got) == target:
            return A1, A2
    return None


if __name__ == "__main__":
    from search_ten_bars import REQUIRED
    extra = [(2, 4), (3, 4), (4, 6), (4, 10), (7, 4), (9, 2)]
    res = realize(range(1, 11), REQUIRED + extra)
    if res is None:
        print("failed", file=sys.stderr)
        sys.exit(1)
    A1, A2 = res
    for i in A1.ids():
        p, q = A1.pose(i), A2.pose(i)
        print(f"    {i}: (({p.x}, {p.y}), ({q.x}, {q.y})),")
