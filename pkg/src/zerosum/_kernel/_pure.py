"""Pure-Python search kernels (reference backend).

The compiled backend in ``_ckernel.pyx`` mirrors every function here; the two
must stay in lockstep because parity tests compare values, witnesses and node
counts.  Everything speaks packed element indices and dense packed tables
(see ``zerosum.groups``).

DP states for the fixed-length detector are per-count reachable-sum sets:
``rows[k]`` holds every sum obtainable by choosing exactly k elements of the
multiset pushed so far.  Pushing one copy of ``e`` is one bounded-knapsack
step (descending k, so the new copy is used at most once).
"""

from __future__ import annotations

import time

BACKEND = "pure"

_TIME_MASK = 0x7FF  # consult the deadline every 2048 nodes


def _table(x):
    return x if isinstance(x, list) else x.tolist()


def _opt_table(x):
    return None if x is None else _table(x)


# -- single-shot detectors ----------------------------------------------------


def zs_fixed_has(order, add, items, L) -> bool:
    """True iff the multiset [(elem, mult), ...] has a zero-sum subsequence of
    length exactly L.  L = 0 counts the empty subsequence."""
    if L == 0:
        return True
    if sum(m for _, m in items) < L:
        return False
    add = _table(add)
    rows = _state_new(L)
    for e, mult in items:
        if _state_push(rows, add[e], mult, L):
            return True
    return False


def zs_fixed_stages(order, add, items, L):
    """Per-item DP snapshots for witness reconstruction.

    Entry i holds the rows after pushing items[:i]; entry 0 is the empty state.
    """
    add = _table(add)
    rows = _state_new(L)
    stages = [_state_copy(rows)]
    for e, mult in items:
        _state_push(rows, add[e], mult, L)
        stages.append(_state_copy(rows))
    return stages


def zs_any_has(order, add, items) -> bool:
    """True iff some nonempty subsequence of the multiset sums to zero."""
    add = _table(add)
    reach: set[int] = set()
    for e, mult in items:
        arow = add[e]
        for _ in range(mult):
            if e == 0:
                return True
            reach = reach | {arow[s] for s in reach}
            reach.add(e)
            if 0 in reach:
                return True
    return False


# -- fixed-length DP state -----------------------------------------------------


def _state_new(L):
    rows = [set() for _ in range(L + 1)]
    rows[0].add(0)
    return rows


def _state_copy(rows):
    return [set(r) for r in rows]


def _state_push(rows, arow, copies, L) -> bool:
    """Push ``copies`` copies of one element; True when (L, 0) is reached."""
    for _ in range(copies):
        for k in range(L, 0, -1):
            below = rows[k - 1]
            if below:
                rows[k] |= {arow[s] for s in below}
    return 0 in rows[L]


def _canon_is_min(seq, perms) -> bool:
    """False when some permutation maps the sorted tuple strictly lower."""
    for p in perms:
        img = sorted(p[x] for x in seq)
        if img < seq:
            return False
    return True


# -- extremal subtree search (EGZ constant / squarefree / Davenport) ----------


def extremal_subtree(
    order,
    add,
    L,
    maxmult,
    prefix,
    aut,
    canon_depth,
    node_budget,
    deadline,
    witness_cap,
    mode,
):
    """Enumerate predicate-free nondecreasing extensions of ``prefix``.

    mode 0: no zero-sum subsequence of length exactly L.
    mode 1: no nonempty zero-sum subsequence (L ignored).

    Returns the longest surviving length in the subtree, the surviving
    sequences of that length (up to ``witness_cap``), the node count, and
    truncation flags.  ``max_len`` is -1 when the prefix itself is dead.
    """
    add = _table(add)
    perms = _opt_table(aut)
    maxmult = _table(maxmult)
    prefix = list(prefix)
    k0 = len(prefix)

    if mode == 0:
        state = _state_new(L)
        for e in prefix:
            if _state_push(state, add[e], 1, L):
                return _subtree_result(-1, [], 0, False, False)
    else:
        state = set()
        for e in prefix:
            state = _reach_push(state, add[e], e)
            if state is None:
                return _subtree_result(-1, [], 0, False, False)

    used = [0] * order
    for e in prefix:
        used[e] += 1

    seq = list(prefix)
    states = [state]
    best = k0
    witnesses = [tuple(seq)]
    overflow = False
    nodes = 0
    truncated = False
    cursors = [seq[-1] if seq else 0]

    while cursors:
        e = cursors[-1]
        if e >= order:
            cursors.pop()
            if cursors:
                states.pop()
                used[seq.pop()] -= 1
            continue
        cursors[-1] = e + 1
        if used[e] >= maxmult[e]:
            continue
        if node_budget > 0 and nodes >= node_budget:
            truncated = True
            break
        nodes += 1
        if deadline and (nodes & _TIME_MASK) == 0 and time.monotonic() > deadline:
            truncated = True
            break
        if perms is not None and len(seq) + 1 <= canon_depth:
            if not _canon_is_min(seq + [e], perms):
                continue
        if mode == 0:
            st = _state_copy(states[-1])
            if _state_push(st, add[e], 1, L):
                continue
        else:
            st = _reach_push(states[-1], add[e], e)
            if st is None:
                continue
        seq.append(e)
        used[e] += 1
        states.append(st)
        cursors.append(e)
        if len(seq) > best:
            best = len(seq)
            witnesses = [tuple(seq)]
            overflow = False
        elif len(seq) == best:
            if len(witnesses) < witness_cap:
                witnesses.append(tuple(seq))
            else:
                overflow = True

    return _subtree_result(best, witnesses, nodes, truncated, overflow)


def _reach_push(reach, arow, e):
    """Reachable nonempty-subset sums after adding one copy of e; None if 0 hit."""
    if e == 0:
        return None
    out = reach | {arow[s] for s in reach}
    out.add(e)
    if 0 in out:
        return None
    return out


def _subtree_result(max_len, witnesses, nodes, truncated, overflow):
    return {
        "max_len": max_len,
        "witnesses": witnesses,
        "nodes": nodes,
        "truncated": truncated,
        "witness_overflow": overflow,
    }


# -- distinguished-element subtree search --------------------------------------


def d0_subtree(order, add, n, c, prefix, aut, canon_depth, node_budget, deadline):
    """Search for T extending ``prefix`` such that 0 * T^(n-1) has no zero-sum
    subsequence of length n and |T| = c.

    Returns the first such T in lexicographic order (a counterexample for the
    distinguished-element property) or None when the subtree is exhausted.
    ``orbits`` counts the candidate prefixes that survived both the symmetry
    filter and the zero-sum pruning.
    """
    add = _table(add)
    perms = _opt_table(aut)
    prefix = list(prefix)
    L = n

    state = _state_new(L)
    dead = _state_push(state, add[0], 1, L)
    for e in prefix:
        if dead:
            break
        dead = _state_push(state, add[e], n - 1, L)
    if dead:
        return {"counterexample": None, "nodes": 0, "orbits": 0, "truncated": False}
    if len(prefix) >= c:
        return {
            "counterexample": tuple(prefix[:c]),
            "nodes": 0,
            "orbits": 0,
            "truncated": False,
        }

    seq = list(prefix)
    states = [state]
    nodes = 0
    orbits = 0
    truncated = False
    counterexample = None
    cursors = [seq[-1] if seq else 0]

    while cursors:
        e = cursors[-1]
        if e >= order:
            cursors.pop()
            if cursors:
                states.pop()
                seq.pop()
            continue
        cursors[-1] = e + 1
        if node_budget > 0 and nodes >= node_budget:
            truncated = True
            break
        nodes += 1
        if deadline and (nodes & _TIME_MASK) == 0 and time.monotonic() > deadline:
            truncated = True
            break
        if perms is not None and len(seq) + 1 <= canon_depth:
            if not _canon_is_min(seq + [e], perms):
                continue
        st = _state_copy(states[-1])
        if _state_push(st, add[e], n - 1, L):
            continue
        orbits += 1
        if len(seq) + 1 == c:
            counterexample = tuple(seq + [e])
            break
        seq.append(e)
        states.append(st)
        cursors.append(e)

    return {
        "counterexample": counterexample,
        "nodes": nodes,
        "orbits": orbits,
        "truncated": truncated,
    }


# -- cap subtree search ---------------------------------------------------------


def cap_subtree(
    order,
    third,
    dir_layers,
    n_dirs,
    layer_cap,
    prefix,
    start,
    best_known,
    aut,
    canon_depth,
    node_budget,
    deadline,
    witness_cap,
):
    """Extend ``prefix`` (a cap, points strictly increasing) with points >= start.

    ``third`` is the flattened table of the third point on the line through
    two distinct points.  When ``dir_layers`` is given, every one of the
    ``n_dirs`` line directions slices the space into 3 layers and a cap may
    use at most ``layer_cap`` points per layer.  ``aut`` holds sampled affine
    permutations for lex-minimality pruning at depths <= canon_depth.
    """
    third = _table(third)
    layers = _opt_table(dir_layers)
    perms = _opt_table(aut)
    chosen = list(prefix)
    blocked = [0] * order
    lcount = [[0] * 3 for _ in range(n_dirs)] if layers is not None else None
    for i, a in enumerate(chosen):
        for b in chosen[i + 1 :]:
            blocked[third[a][b]] += 1
        if lcount is not None:
            for d in range(n_dirs):
                lcount[d][layers[d][a]] += 1

    best = len(chosen)
    witnesses = [tuple(chosen)]
    overflow = False
    nodes = 0
    truncated = False
    cursors = [start]
    rems = [sum(1 for x in range(start, order) if not blocked[x])]

    while cursors:
        e = cursors[-1]
        if e >= order:
            cursors.pop()
            rems.pop()
            if cursors:
                p = chosen.pop()
                for a in chosen:
                    blocked[third[a][p]] -= 1
                if lcount is not None:
                    for d in range(n_dirs):
                        lcount[d][layers[d][p]] -= 1
            continue
        cursors[-1] = e + 1
        if blocked[e]:
            continue
        rem_here = rems[-1]  # unblocked points in [e, order)
        rems[-1] = rem_here - 1
        if node_budget > 0 and nodes >= node_budget:
            truncated = True
            break
        nodes += 1
        if deadline and (nodes & _TIME_MASK) == 0 and time.monotonic() > deadline:
            truncated = True
            break
        if len(chosen) + rem_here < max(best, best_known):
            continue
        if lcount is not None:
            ok = True
            for d in range(n_dirs):
                if lcount[d][layers[d][e]] + 1 > layer_cap:
                    ok = False
                    break
            if not ok:
                continue
        if perms is not None and len(chosen) + 1 <= canon_depth:
            if not _canon_is_min(chosen + [e], perms):
                continue
        for a in chosen:
            blocked[third[a][e]] += 1
        chosen.append(e)
        if lcount is not None:
            for d in range(n_dirs):
                lcount[d][layers[d][e]] += 1
        cursors.append(e + 1)
        rems.append(sum(1 for x in range(e + 1, order) if not blocked[x]))
        if len(chosen) > best:
            best = len(chosen)
            witnesses = [tuple(chosen)]
            overflow = False
        elif len(chosen) == best:
            if len(witnesses) < witness_cap:
                witnesses.append(tuple(chosen))
            else:
                overflow = True

    return {
        "max_size": best,
        "witnesses": witnesses,
        "nodes": nodes,
        "truncated": truncated,
        "witness_overflow": overflow,
    }
