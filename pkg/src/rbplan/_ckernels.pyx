# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled search kernels; same contracts as ``_pykernels`` for widths <= 63."""
from libc.stdint cimport uint64_t, uint8_t
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector
import time

cdef int CHECK_EVERY = 1024


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _pop(uint64_t x) nogil:
    return __builtin_popcountll(x)


def dp_labeled(list out_masks, uint8_t[:] mrb, uint8_t[:] last, uint8_t[:] bcount):
    cdef int n = len(out_masks)
    cdef vector[uint64_t] out
    cdef int i
    for i in range(n):
        out.push_back(<uint64_t>out_masks[i])
    cdef uint64_t full = (<uint64_t>1 << n) - 1
    cdef uint64_t S, P, outside
    cdef int b, best, bl, tc, v, m
    mrb[0] = 0
    last[0] = 255
    bcount[0] = 0
    with nogil:
        S = 1
        while S <= full:
            outside = full & ~S
            b = 0
            best = 255
            bl = 255
            for i in range(n):
                if not ((S >> i) & 1):
                    continue
                tc = 1 if (out[i] & outside) else 0
                b += tc
                P = S & ~(<uint64_t>1 << i)
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
            S += 1


cdef inline void _prepare(vector[uint64_t]& out, int n, uint64_t full, uint64_t S,
                          int* f_out, int* b_out) nogil:
    cdef uint64_t outside = full & ~S
    cdef int b = 0
    cdef int f = -1
    cdef int i
    for i in range(n):
        if (S >> i) & 1:
            if out[i] & outside:
                b += 1
        elif f < 0 and not (out[i] & outside):
            f = i
    f_out[0] = f
    b_out[0] = b


def dfdp_labeled_decide(list out_masks, int rb, double deadline):
    cdef int n = len(out_masks)
    cdef vector[uint64_t] out
    cdef int i
    for i in range(n):
        out.push_back(<uint64_t>out_masks[i])
    cdef uint64_t full = (<uint64_t>1 << n) - 1
    if full == 0:
        return [], 0, False
    cdef unordered_set[uint64_t] visited
    visited.insert(0)
    cdef vector[uint64_t] S_stack
    cdef vector[int] pos, free, bcnt, taken
    cdef int f, b, k, child
    cdef uint64_t S, T
    cdef long long nodes = 1
    S_stack.push_back(0)
    pos.push_back(0)
    _prepare(out, n, full, 0, &f, &b)
    free.push_back(f)
    bcnt.push_back(b)
    while S_stack.size() > 0:
        k = S_stack.size() - 1
        S = S_stack[k]
        child = -1
        if free[k] >= 0:
            if pos[k] == 0:
                pos[k] = 1
                child = free[k]
        elif bcnt[k] + 1 <= rb:
            i = pos[k]
            while i < n:
                if not ((S >> i) & 1):
                    child = i
                    i += 1
                    break
                i += 1
            pos[k] = i
        if child < 0:
            S_stack.pop_back()
            pos.pop_back()
            free.pop_back()
            bcnt.pop_back()
            if taken.size() > 0:
                taken.pop_back()
            continue
        T = S | (<uint64_t>1 << child)
        if not visited.insert(T).second:
            continue
        taken.push_back(child)
        if T == full:
            return [taken[i] for i in range(taken.size())], nodes, False
        nodes += 1
        if nodes % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            return None, nodes, True
        S_stack.push_back(T)
        pos.push_back(0)
        _prepare(out, n, full, T, &f, &b)
        free.push_back(f)
        bcnt.push_back(b)
    return None, nodes, False


cdef inline int _free_goal(vector[uint64_t]& gm, int m, uint64_t G, uint64_t N) nogil:
    cdef int i
    cdef uint64_t rest
    for i in range(m):
        if not ((G >> i) & 1):
            rest = gm[i] & ~N
            if (rest & (rest - 1)) == 0:
                return i
    return -1


def dfdp_unlabeled_decide(list goal_masks, int rb, double deadline):
    cdef int m = len(goal_masks)
    cdef vector[uint64_t] gm
    cdef int i
    for i in range(m):
        gm.push_back(<uint64_t>goal_masks[i])
    cdef uint64_t full = (<uint64_t>1 << m) - 1
    if full == 0:
        return [], 0, False
    cdef unordered_set[uint64_t] visited
    visited.insert(0)
    cdef vector[uint64_t] G_stack, N_stack
    cdef vector[int] pos, free, taken
    cdef int k, child, ng
    cdef uint64_t G, N, T
    cdef long long nodes = 1
    G_stack.push_back(0)
    N_stack.push_back(0)
    pos.push_back(0)
    free.push_back(_free_goal(gm, m, 0, 0))
    while G_stack.size() > 0:
        k = G_stack.size() - 1
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
                if not ((G >> i) & 1) and _pop(N | gm[i]) - ng <= rb:
                    child = i
                    i += 1
                    break
                i += 1
            pos[k] = i
        if child < 0:
            G_stack.pop_back()
            N_stack.pop_back()
            pos.pop_back()
            free.pop_back()
            if taken.size() > 0:
                taken.pop_back()
            continue
        T = G | (<uint64_t>1 << child)
        if not visited.insert(T).second:
            continue
        taken.push_back(child)
        if T == full:
            return [taken[i] for i in range(taken.size())], nodes, False
        nodes += 1
        if nodes % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            return None, nodes, True
        G_stack.push_back(T)
        N_stack.push_back(N | gm[child])
        pos.push_back(0)
        free.push_back(_free_goal(gm, m, T, N | gm[child]))
    return None, nodes, False
