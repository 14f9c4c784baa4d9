"""Pure-Python search kernels over bitmask subsets.

Object (or goal) k is bit k. ``out_masks[k]`` holds the dependencies of object
k; ``goal_masks[k]`` holds the start vertices overlapping goal k. These
functions mirror ``_ckernels`` exactly and are used when the compiled module
is unavailable or the instance is wider than 63 bits.
"""
import time

CHECK_EVERY = 1024


def popcount(x):
    return bin(x).count("1")


def dp_labeled(out_masks, mrb, last, bcount):
    """Fill subset tables: running-buffer optimum, last object, buffered count.

    ``mrb``, ``last`` and ``bcount`` are writable byte buffers of size 2**n.
    """
    n = len(out_masks)
    full = (1 << n) - 1
    mrb[0] = 0
    last[0] = 255
    bcount[0] = 0
    for S in range(1, full + 1):
        outside = full & ~S
        b = 0
        best = 255
        bl = 255
        for i in range(n):
            if not (S >> i) & 1:
                continue
            tc = 1 if out_masks[i] & outside else 0
            b += tc
            P = S & ~(1 << i)
            v = bcount[P] + tc
            m = mrb[P]
            if v > m:
                m = v
            if m < best:
                best = m
                bl = i
        mrb[S] = best
        last[S] = bl
        bcount[S] = b


def dfdp_labeled_decide(out_masks, rb, deadline):
    """Depth-first search for an ordering with peak buffer use <= rb.

    Returns (ordering as bit indices or None, nodes expanded, timed_out).
    """
    n = len(out_masks)
    full = (1 << n) - 1
    if full == 0:
        return [], 0, False
    visited = {0}
    # per level: subset, next candidate index, forced free child (-1 if none), buffered count
    S_stack = [0]
    pos = [0]
    free = [-1]
    bcnt = [0]
    taken = []
    nodes = 1
    _prepare(out_masks, n, full, 0, free, bcnt, 0)
    while S_stack:
        k = len(S_stack) - 1
        S = S_stack[k]
        child = -1
        if free[k] >= 0:
            if pos[k] == 0:
                pos[k] = 1
                child = free[k]
        elif bcnt[k] + 1 <= rb:
            i = pos[k]
            while i < n:
                if not (S >> i) & 1:
                    child = i
                    i += 1
                    break
                i += 1
            pos[k] = i
        if child < 0:
            S_stack.pop()
            pos.pop()
            free.pop()
            bcnt.pop()
            if taken:
                taken.pop()
            continue
        T = S | (1 << child)
        if T in visited:
            continue
        visited.add(T)
        taken.append(child)
        if T == full:
            return taken, nodes, False
        nodes += 1
        if nodes % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            return None, nodes, True
        S_stack.append(T)
        pos.append(0)
        free.append(-1)
        bcnt.append(0)
        _prepare(out_masks, n, full, T, free, bcnt, len(S_stack) - 1)
    return None, nodes, False


def _prepare(out_masks, n, full, S, free, bcnt, k):
    outside = full & ~S
    b = 0
    f = -1
    for i in range(n):
        if (S >> i) & 1:
            if out_masks[i] & outside:
                b += 1
        elif f < 0 and not (out_masks[i] & outside):
            f = i
    free[k] = f
    bcnt[k] = b


def dfdp_unlabeled_decide(goal_masks, rb, deadline):
    """Depth-first search for a goal order with peak occupancy <= rb.

    Occupancy after removing goal set G is max(0, |N(G)| - |G|).
    Returns (goal order as bit indices or None, nodes expanded, timed_out).
    """
    m = len(goal_masks)
    full = (1 << m) - 1
    if full == 0:
        return [], 0, False
    visited = {0}
    G_stack = [0]
    N_stack = [0]
    pos = [0]
    free = [_free_goal(goal_masks, m, 0, 0)]
    taken = []
    nodes = 1
    while G_stack:
        k = len(G_stack) - 1
        G = G_stack[k]
        N = N_stack[k]
        child = -1
        if free[k] >= 0:
            if pos[k] == 0:
                pos[k] = 1
                child = free[k]
        else:
            i = pos[k]
            ng = k + 1
            while i < m:
                if not (G >> i) & 1 and popcount(N | goal_masks[i]) - ng <= rb:
                    child = i
                    i += 1
                    break
                i += 1
            pos[k] = i
        if child < 0:
            G_stack.pop()
            N_stack.pop()
            pos.pop()
            free.pop()
            if taken:
                taken.pop()
            continue
        T = G | (1 << child)
        if T in visited:
            continue
        visited.add(T)
        taken.append(child)
        if T == full:
            return taken, nodes, False
        nodes += 1
        if nodes % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            return None, nodes, True
        NT = N | goal_masks[child]
        G_stack.append(T)
        N_stack.append(NT)
        pos.append(0)
        free.append(_free_goal(goal_masks, m, T, NT))
    return None, nodes, False


def _free_goal(goal_masks, m, G, N):
    for i in range(m):
        if not (G >> i) & 1:
            rest = goal_masks[i] & ~N
            if rest & (rest - 1) == 0:
                return i
    return -1
