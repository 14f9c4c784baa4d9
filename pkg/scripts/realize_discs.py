"""Find unit-disc start/goal centres realizing a target start-goal overlap graph.

Penalty descent with a clearance margin from random initial layouts; the
result is accepted only if rebuilding both dependency graphs from the
geometry reproduces the target exactly and no two edges cross.
"""
import sys

import numpy as np
from scipy.optimize import minimize

from rbplan.depgraph import build_unlabeled, is_planar_straightline
from rbplan.geometry import Arrangement, Disc, Pose, Workspace, validate_arrangement

MARGIN = 0.2


def _loss(z, n, edges, margin, free=frozenset()):
    P = z.reshape(2 * n, 2)
    S, G = P[:n], P[n:]
    loss = 0.0
    grad = np.zeros_like(P)

    def push(a, b, pa, pb, lo=None, hi=None):
        nonlocal loss
        d = pa - pb
        dist = np.sqrt((d * d).sum()) + 1e-12
        if lo is not None and dist < lo:
            v = lo - dist
            loss += v * v
            g = -2 * v * d / dist
        elif hi is not None and dist > hi:
            v = dist - hi
            loss += v * v
            g = 2 * v * d / dist
        else:
            return
        grad[a] += g
        grad[b] -= g

    for i in range(n):
        for j in range(i + 1, n):
            push(i, j, S[i], S[j], lo=2 + margin)
            push(n + i, n + j, G[i], G[j], lo=2 + margin)
    for s in range(n):
        for g in range(n):
            if (s, g) in free:
                continue
            if (s, g) in edges:
                push(s, n + g, S[s], G[g], hi=2 - margin)
            else:
                push(s, n + g, S[s], G[g], lo=2 + margin)
    return loss, grad.ravel()


def realize(n, edges, seeds=range(2000), box=8.0, free=frozenset(), accept=None):
    """``edges``: set of (start index, goal index), 0-based; pairs in ``free`` may go either way.

    ``accept`` is an extra predicate on the unlabeled graph.
    """
    for seed in seeds:
        rng = np.random.default_rng(seed)
        z0 = rng.uniform(0, box, size=4 * n)
        res = minimize(_loss, z0, args=(n, edges, MARGIN, free), jac=True, method="L-BFGS-B",
                       options={"maxiter": 5000})
        if res.fun > 1e-12:
            continue
        P = res.x.reshape(2 * n, 2)
        P = np.round(P - P.min(axis=0) + 1.5, 3)
        ws = Workspace(float(P[:, 0].max() + 1.5), float(P[:, 1].max() + 1.5))
        A1 = Arrangement(ws, {k + 1: (Disc(1.0), Pose(*P[k])) for k in range(n)})
        A2 = Arrangement(ws, {k + 1: (Disc(1.0), Pose(*P[n + k])) for k in range(n)})
        if validate_arrangement(A1) or validate_arrangement(A2):
            continue
        gu = build_unlabeled(A1, A2)
        want = {(s + 1, g + 1) for s, g in edges}
        loose = {(s + 1, g + 1) for s, g in free}
        if set(gu.edges) - loose != want - loose:
            continue
        if accept is not None and not accept(gu):
            continue
        if not is_planar_straightline(gu, A1, A2):
            continue
        return A1, A2
    return None


SEVEN_DISC_GOALS = {1: [1], 2: [6, 7], 3: [3, 5, 6], 4: [4, 7], 5: [1, 3, 5, 7], 6: [5, 6], 7: [2, 7]}

def seven_discs_accept(gu):
    """Goals 2, 3, 4 survive free-goal removal and become free once goal 5 is cleared."""
    nb = gu.goal_neighbors()
    cleared, removed = set(), set()
    changed = True
    while changed:
        changed = False
        for g in sorted(nb):
            if g not in removed and len(set(nb[g]) - cleared) <= 1:
                removed.add(g)
                cleared |= set(nb[g])
                changed = True
                break
    if removed & {2, 3, 4, 5}:
        return False
    cleared |= set(nb[5])
    return all(len(set(nb[g]) - cleared) <= 1 for g in (2, 3, 4))


if __name__ == "__main__":
    edges = {(s - 1, g - 1) for g, ss in SEVEN_DISC_GOALS.items() for s in ss}
    free = {(k, k) for k in range(7) if k + 1 != 4}
    res = realize(7, edges, free=free, accept=seven_discs_accept)
    if res is None:
        print("failed", file=sys.stderr)
        sys.exit(1)
    A1, A2 = res
    print("workspace", A1.workspace)
    for i in A1.ids():
        p, q = A1.pose(i), A2.pose(i)
        print(f"    {i}: (({p.x}, {p.y}), ({q.x}, {q.y})),")
