# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels; a mechanical port of ``_pure`` (keep in lockstep).

DP states are (L+1) x order byte arrays per stack level: rows[k][s] says k
chosen elements can sum to s.  Pushing one copy of an element is a
bounded-knapsack step over descending k.
"""

import time

import numpy as np

from libc.string cimport memcpy, memset
from cpython.mem cimport PyMem_Malloc, PyMem_Free

BACKEND = "compiled"

DEF TIME_MASK = 0x7FF


cdef inline bint _push_copies(
    unsigned char *rows,
    const int *arow,
    int copies,
    int L,
    int order,
    int *row_any,
) noexcept:
    """Push ``copies`` copies of one element; True when rows[L][0] is set."""
    cdef int c, k, s
    cdef unsigned char *src
    cdef unsigned char *dst
    for c in range(copies):
        for k in range(L, 0, -1):
            if not row_any[k - 1]:
                continue
            src = rows + (k - 1) * order
            dst = rows + k * order
            for s in range(order):
                if src[s]:
                    dst[arow[s]] = 1
            row_any[k] = 1
    return rows[L * order] != 0


cdef inline void _reach_push_inplace(
    unsigned char *reach, const int *arow, int e, int order
) noexcept:
    # reach := reach | (reach + e) | {e}; new sums are marked 2 during the
    # scan so only the old snapshot is expanded, then normalized to 1.
    cdef int s
    for s in range(order):
        if reach[s] == 1 and reach[arow[s]] == 0:
            reach[arow[s]] = 2
    if reach[e] == 0:
        reach[e] = 2
    for s in range(order):
        if reach[s] == 2:
            reach[s] = 1


cdef inline bint _canon_is_min(
    const int *cand,
    int k,
    const int *perms,
    int n_aut,
    int order,
    int *scratch,
) noexcept:
    """False when some permutation maps the sorted tuple strictly lower."""
    cdef int a, i, j, key, cmp
    cdef const int *p
    for a in range(n_aut):
        p = perms + a * order
        for i in range(k):
            key = p[cand[i]]
            j = i - 1
            while j >= 0 and scratch[j] > key:
                scratch[j + 1] = scratch[j]
                j -= 1
            scratch[j + 1] = key
        cmp = 0
        for i in range(k):
            if scratch[i] < cand[i]:
                cmp = -1
                break
            if scratch[i] > cand[i]:
                cmp = 1
                break
        if cmp < 0:
            return False
    return True


# -- single-shot detectors ----------------------------------------------------


def zs_fixed_has(int order, add, items, int L):
    cdef long total = 0
    cdef const int[:, ::1] addv
    cdef unsigned char *rows
    cdef int *row_any
    cdef bint hit = False
    cdef int e, m
    if L == 0:
        return True
    for _, m in items:
        total += m
    if total < L:
        return False
    addv = np.ascontiguousarray(add, dtype=np.int32)
    rows = <unsigned char *> PyMem_Malloc((L + 1) * order)
    row_any = <int *> PyMem_Malloc((L + 1) * sizeof(int))
    if rows == NULL or row_any == NULL:
        PyMem_Free(rows)
        PyMem_Free(row_any)
        raise MemoryError()
    memset(rows, 0, (L + 1) * order)
    memset(row_any, 0, (L + 1) * sizeof(int))
    rows[0] = 1
    row_any[0] = 1
    try:
        for e, m in items:
            if _push_copies(rows, &addv[e, 0], m, L, order, row_any):
                hit = True
                break
        return bool(hit)
    finally:
        PyMem_Free(rows)
        PyMem_Free(row_any)


def zs_any_has(int order, add, items):
    cdef const int[:, ::1] addv = np.ascontiguousarray(add, dtype=np.int32)
    cdef unsigned char *reach = <unsigned char *> PyMem_Malloc(order)
    cdef unsigned char *nxt = <unsigned char *> PyMem_Malloc(order)
    cdef int e, m, i, s
    cdef const int *arow
    cdef bint hit = False
    if reach == NULL or nxt == NULL:
        PyMem_Free(reach)
        PyMem_Free(nxt)
        raise MemoryError()
    memset(reach, 0, order)
    try:
        for e, m in items:
            arow = &addv[e, 0]
            for i in range(m):
                if e == 0:
                    hit = True
                    break
                memcpy(nxt, reach, order)
                for s in range(order):
                    if reach[s]:
                        nxt[arow[s]] = 1
                nxt[e] = 1
                if nxt[0]:
                    hit = True
                    break
                memcpy(reach, nxt, order)
            if hit:
                break
        return bool(hit)
    finally:
        PyMem_Free(reach)
        PyMem_Free(nxt)


# -- extremal subtree search ----------------------------------------------------


def extremal_subtree(
    int order,
    add,
    int L,
    maxmult,
    prefix,
    aut,
    int canon_depth,
    long node_budget,
    double deadline,
    int witness_cap,
    int mode,
):
    cdef const int[:, ::1] addv = np.ascontiguousarray(add, dtype=np.int32)
    cdef const int[:, ::1] autv
    cdef const int *perms = NULL
    cdef int n_aut = 0
    cdef const int[::1] mmv = np.ascontiguousarray(maxmult, dtype=np.int32)
    cdef long total_mult = 0
    cdef int i, e, s, k0, max_depth, state_sz, rows_n, depth, cur_len
    cdef long nodes = 0
    cdef unsigned char *states = NULL
    cdef int *row_any = NULL
    cdef int *seq = NULL
    cdef int *cursors = NULL
    cdef int *used = NULL
    cdef int *cand = NULL
    cdef int *scratch = NULL
    cdef unsigned char *st0
    cdef int *ra0
    cdef unsigned char *parent
    cdef unsigned char *child
    cdef int *pra
    cdef int *cra
    cdef bint dead = False

    if aut is not None:
        autv = np.ascontiguousarray(aut, dtype=np.int32)
        perms = &autv[0, 0]
        n_aut = autv.shape[0]

    prefix = list(prefix)
    k0 = len(prefix)
    for i in range(order):
        total_mult += mmv[i]
    max_depth = <int> total_mult + k0 + 2
    rows_n = L + 2
    state_sz = (L + 1) * order if mode == 0 else order

    states = <unsigned char *> PyMem_Malloc((max_depth + 2) * state_sz)
    row_any = <int *> PyMem_Malloc((max_depth + 2) * rows_n * sizeof(int))
    seq = <int *> PyMem_Malloc((max_depth + 2) * sizeof(int))
    cursors = <int *> PyMem_Malloc((max_depth + 2) * sizeof(int))
    used = <int *> PyMem_Malloc(order * sizeof(int))
    cand = <int *> PyMem_Malloc((max_depth + 2) * sizeof(int))
    scratch = <int *> PyMem_Malloc((max_depth + 2) * sizeof(int))
    if (states == NULL or row_any == NULL or seq == NULL or cursors == NULL
            or used == NULL or cand == NULL or scratch == NULL):
        PyMem_Free(states)
        PyMem_Free(row_any)
        PyMem_Free(seq)
        PyMem_Free(cursors)
        PyMem_Free(used)
        PyMem_Free(cand)
        PyMem_Free(scratch)
        raise MemoryError()

    st0 = states
    ra0 = row_any
    best = k0
    witnesses = []
    overflow = False
    truncated = False
    try:
        memset(used, 0, order * sizeof(int))
        if mode == 0:
            memset(st0, 0, state_sz)
            memset(ra0, 0, rows_n * sizeof(int))
            st0[0] = 1
            ra0[0] = 1
            for i in range(k0):
                e = prefix[i]
                if _push_copies(st0, &addv[e, 0], 1, L, order, ra0):
                    dead = True
                    break
        else:
            memset(st0, 0, state_sz)
            for i in range(k0):
                e = prefix[i]
                if e == 0:
                    dead = True
                    break
                _reach_push_inplace(st0, &addv[e, 0], e, order)
                if st0[0]:
                    dead = True
                    break
        if dead:
            return {
                "max_len": -1,
                "witnesses": [],
                "nodes": 0,
                "truncated": False,
                "witness_overflow": False,
            }

        for i in range(k0):
            seq[i] = prefix[i]
            used[prefix[i]] += 1
        witnesses = [tuple(prefix)]
        depth = 0
        cursors[0] = seq[k0 - 1] if k0 else 0

        while depth >= 0:
            e = cursors[depth]
            if e >= order:
                depth -= 1
                if depth >= 0:
                    used[seq[k0 + depth]] -= 1
                continue
            cursors[depth] = e + 1
            if used[e] >= mmv[e]:
                continue
            if node_budget > 0 and nodes >= node_budget:
                truncated = True
                break
            nodes += 1
            if deadline != 0.0 and (nodes & TIME_MASK) == 0:
                if time.monotonic() > deadline:
                    truncated = True
                    break
            cur_len = k0 + depth
            if perms != NULL and cur_len + 1 <= canon_depth:
                for i in range(cur_len):
                    cand[i] = seq[i]
                cand[cur_len] = e
                if not _canon_is_min(cand, cur_len + 1, perms, n_aut, order, scratch):
                    continue
            parent = states + depth * state_sz
            child = states + (depth + 1) * state_sz
            if mode == 0:
                memcpy(child, parent, state_sz)
                pra = row_any + depth * rows_n
                cra = row_any + (depth + 1) * rows_n
                memcpy(cra, pra, rows_n * sizeof(int))
                if _push_copies(child, &addv[e, 0], 1, L, order, cra):
                    continue
            else:
                if e == 0:
                    continue
                memcpy(child, parent, order)
                _reach_push_inplace(child, &addv[e, 0], e, order)
                if child[0]:
                    continue
            seq[cur_len] = e
            used[e] += 1
            depth += 1
            cursors[depth] = e
            if cur_len + 1 > best:
                best = cur_len + 1
                witnesses = [tuple(seq[i] for i in range(cur_len + 1))]
                overflow = False
            elif cur_len + 1 == best:
                if len(witnesses) < witness_cap:
                    witnesses.append(tuple(seq[i] for i in range(cur_len + 1)))
                else:
                    overflow = True

        return {
            "max_len": best,
            "witnesses": witnesses,
            "nodes": nodes,
            "truncated": truncated,
            "witness_overflow": overflow,
        }
    finally:
        PyMem_Free(states)
        PyMem_Free(row_any)
        PyMem_Free(seq)
        PyMem_Free(cursors)
        PyMem_Free(used)
        PyMem_Free(cand)
        PyMem_Free(scratch)


# -- distinguished-element subtree search ----------------------------------------


def d0_subtree(
    int order,
    add,
    int n,
    int c,
    prefix,
    aut,
    int canon_depth,
    long node_budget,
    double deadline,
):
    cdef const int[:, ::1] addv = np.ascontiguousarray(add, dtype=np.int32)
    cdef const int[:, ::1] autv
    cdef const int *perms = NULL
    cdef int n_aut = 0
    cdef int i, e, k0, L, state_sz, rows_n, levels, depth, cur_len
    cdef long nodes = 0
    cdef int orbits = 0
    cdef unsigned char *states = NULL
    cdef int *row_any = NULL
    cdef int *seq = NULL
    cdef int *cursors = NULL
    cdef int *cand = NULL
    cdef int *scratch = NULL
    cdef unsigned char *st0
    cdef int *ra0
    cdef unsigned char *parent
    cdef unsigned char *child
    cdef int *pra
    cdef int *cra
    cdef bint dead

    if aut is not None:
        autv = np.ascontiguousarray(aut, dtype=np.int32)
        perms = &autv[0, 0]
        n_aut = autv.shape[0]

    prefix = list(prefix)
    k0 = len(prefix)
    L = n
    state_sz = (L + 1) * order
    rows_n = L + 2
    levels = c + 3

    states = <unsigned char *> PyMem_Malloc(levels * state_sz)
    row_any = <int *> PyMem_Malloc(levels * rows_n * sizeof(int))
    seq = <int *> PyMem_Malloc(levels * sizeof(int))
    cursors = <int *> PyMem_Malloc(levels * sizeof(int))
    cand = <int *> PyMem_Malloc(levels * sizeof(int))
    scratch = <int *> PyMem_Malloc(levels * sizeof(int))
    if (states == NULL or row_any == NULL or seq == NULL or cursors == NULL
            or cand == NULL or scratch == NULL):
        PyMem_Free(states)
        PyMem_Free(row_any)
        PyMem_Free(seq)
        PyMem_Free(cursors)
        PyMem_Free(cand)
        PyMem_Free(scratch)
        raise MemoryError()

    truncated = False
    counterexample = None
    st0 = states
    ra0 = row_any
    try:
        memset(st0, 0, state_sz)
        memset(ra0, 0, rows_n * sizeof(int))
        st0[0] = 1
        ra0[0] = 1
        dead = _push_copies(st0, &addv[0, 0], 1, L, order, ra0)
        for i in range(k0):
            if dead:
                break
            e = prefix[i]
            dead = _push_copies(st0, &addv[e, 0], n - 1, L, order, ra0)
        if dead:
            return {
                "counterexample": None,
                "nodes": 0,
                "orbits": 0,
                "truncated": False,
            }
        if k0 >= c:
            return {
                "counterexample": tuple(prefix[:c]),
                "nodes": 0,
                "orbits": 0,
                "truncated": False,
            }

        for i in range(k0):
            seq[i] = prefix[i]
        depth = 0
        cursors[0] = seq[k0 - 1] if k0 else 0

        while depth >= 0:
            e = cursors[depth]
            if e >= order:
                depth -= 1
                continue
            cursors[depth] = e + 1
            if node_budget > 0 and nodes >= node_budget:
                truncated = True
                break
            nodes += 1
            if deadline != 0.0 and (nodes & TIME_MASK) == 0:
                if time.monotonic() > deadline:
                    truncated = True
                    break
            cur_len = k0 + depth
            if perms != NULL and cur_len + 1 <= canon_depth:
                for i in range(cur_len):
                    cand[i] = seq[i]
                cand[cur_len] = e
                if not _canon_is_min(cand, cur_len + 1, perms, n_aut, order, scratch):
                    continue
            parent = states + depth * state_sz
            child = states + (depth + 1) * state_sz
            memcpy(child, parent, state_sz)
            pra = row_any + depth * rows_n
            cra = row_any + (depth + 1) * rows_n
            memcpy(cra, pra, rows_n * sizeof(int))
            if _push_copies(child, &addv[e, 0], n - 1, L, order, cra):
                continue
            orbits += 1
            if cur_len + 1 == c:
                counterexample = tuple([seq[i] for i in range(cur_len)] + [e])
                break
            seq[cur_len] = e
            depth += 1
            cursors[depth] = e

        return {
            "counterexample": counterexample,
            "nodes": nodes,
            "orbits": orbits,
            "truncated": truncated,
        }
    finally:
        PyMem_Free(states)
        PyMem_Free(row_any)
        PyMem_Free(seq)
        PyMem_Free(cursors)
        PyMem_Free(cand)
        PyMem_Free(scratch)


# -- cap subtree search ------------------------------------------------------------


def cap_subtree(
    int order,
    third,
    dir_layers,
    int n_dirs,
    int layer_cap,
    prefix,
    int start,
    int best_known,
    aut,
    int canon_depth,
    long node_budget,
    double deadline,
    int witness_cap,
):
    cdef const int[:, ::1] thirdv = np.ascontiguousarray(third, dtype=np.int32)
    cdef const int[:, ::1] layv
    cdef const int *layers = NULL
    cdef const int[:, ::1] autv
    cdef const int *perms = NULL
    cdef int n_aut = 0
    cdef int i, j, e, d, p, x, k0, levels, depth, n_chosen
    cdef long nodes = 0
    cdef long rem_here
    cdef int *chosen = NULL
    cdef int *cursors = NULL
    cdef long *rems = NULL
    cdef int *blocked = NULL
    cdef int *lcount = NULL
    cdef int *scratch = NULL
    cdef bint ok

    if dir_layers is not None:
        layv = np.ascontiguousarray(dir_layers, dtype=np.int32)
        layers = &layv[0, 0]
    if aut is not None:
        autv = np.ascontiguousarray(aut, dtype=np.int32)
        perms = &autv[0, 0]
        n_aut = autv.shape[0]

    prefix = list(prefix)
    k0 = len(prefix)
    levels = order + 2
    chosen = <int *> PyMem_Malloc(levels * sizeof(int))
    cursors = <int *> PyMem_Malloc(levels * sizeof(int))
    rems = <long *> PyMem_Malloc(levels * sizeof(long))
    blocked = <int *> PyMem_Malloc(order * sizeof(int))
    lcount = <int *> PyMem_Malloc((n_dirs * 3 + 1) * sizeof(int))
    scratch = <int *> PyMem_Malloc(levels * sizeof(int))
    if (chosen == NULL or cursors == NULL or rems == NULL or blocked == NULL
            or lcount == NULL or scratch == NULL):
        PyMem_Free(chosen)
        PyMem_Free(cursors)
        PyMem_Free(rems)
        PyMem_Free(blocked)
        PyMem_Free(lcount)
        PyMem_Free(scratch)
        raise MemoryError()

    truncated = False
    try:
        memset(blocked, 0, order * sizeof(int))
        memset(lcount, 0, (n_dirs * 3 + 1) * sizeof(int))
        for i in range(k0):
            chosen[i] = prefix[i]
        for i in range(k0):
            for j in range(i + 1, k0):
                blocked[thirdv[chosen[i], chosen[j]]] += 1
            if layers != NULL:
                for d in range(n_dirs):
                    lcount[d * 3 + layers[d * order + chosen[i]]] += 1

        n_chosen = k0
        best = k0
        witnesses = [tuple(prefix)]
        overflow = False
        depth = 0
        cursors[0] = start
        rem_here = 0
        for x in range(start, order):
            if blocked[x] == 0:
                rem_here += 1
        rems[0] = rem_here

        while depth >= 0:
            e = cursors[depth]
            if e >= order:
                depth -= 1
                if depth >= 0:
                    n_chosen -= 1
                    p = chosen[n_chosen]
                    for i in range(n_chosen):
                        blocked[thirdv[chosen[i], p]] -= 1
                    if layers != NULL:
                        for d in range(n_dirs):
                            lcount[d * 3 + layers[d * order + p]] -= 1
                continue
            cursors[depth] = e + 1
            if blocked[e]:
                continue
            rem_here = rems[depth]
            rems[depth] = rem_here - 1
            if node_budget > 0 and nodes >= node_budget:
                truncated = True
                break
            nodes += 1
            if deadline != 0.0 and (nodes & TIME_MASK) == 0:
                if time.monotonic() > deadline:
                    truncated = True
                    break
            if n_chosen + rem_here < (best if best > best_known else best_known):
                continue
            if layers != NULL:
                ok = True
                for d in range(n_dirs):
                    if lcount[d * 3 + layers[d * order + e]] + 1 > layer_cap:
                        ok = False
                        break
                if not ok:
                    continue
            if perms != NULL and n_chosen + 1 <= canon_depth:
                chosen[n_chosen] = e
                if not _canon_is_min(chosen, n_chosen + 1, perms, n_aut, order, scratch):
                    continue
            for i in range(n_chosen):
                blocked[thirdv[chosen[i], e]] += 1
            chosen[n_chosen] = e
            n_chosen += 1
            if layers != NULL:
                for d in range(n_dirs):
                    lcount[d * 3 + layers[d * order + e]] += 1
            depth += 1
            cursors[depth] = e + 1
            rem_here = 0
            for x in range(e + 1, order):
                if blocked[x] == 0:
                    rem_here += 1
            rems[depth] = rem_here
            if n_chosen > best:
                best = n_chosen
                witnesses = [tuple(chosen[i] for i in range(n_chosen))]
                overflow = False
            elif n_chosen == best:
                if len(witnesses) < witness_cap:
                    witnesses.append(tuple(chosen[i] for i in range(n_chosen)))
                else:
                    overflow = True

        return {
            "max_size": best,
            "witnesses": witnesses,
            "nodes": nodes,
            "truncated": truncated,
            "witness_overflow": overflow,
        }
    finally:
        PyMem_Free(chosen)
        PyMem_Free(cursors)
        PyMem_Free(rems)
        PyMem_Free(blocked)
        PyMem_Free(lcount)
        PyMem_Free(scratch)
