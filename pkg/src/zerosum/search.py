"""Exact computation of the zero-sum invariants D, s, g by exhaustive search,
plus the affine cap search in ternary space.

All searches are depth-first over nondecreasing packed sequences (orderly
generation), pruned the moment the forbidden zero-sum appears; the predicate
is monotone under taking supersequences, so pruning is sound.  Symmetry is
broken three ways, each of which only ever removes candidates whose orbit
keeps a lexicographically smaller member:

* the first element is pinned (translation normal form for the fixed-length
  invariants, orbit-minimal content representatives for the Davenport search),
* depth-two prefixes are reduced to orbit-minimal pairs under Aut(G),
* deeper prefixes are discarded when a sampled automorphism maps them lower.

Subtrees below the depth-two roots run in the selected kernel backend and can
be sharded across worker processes; results merge by maximum, so the computed
value is schedule-independent.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import _kernel
from .errors import UnsupportedGroup
from .groups import (
    GroupSpec,
    add_table,
    affine_perm_sample,
    aut_perm_sample,
    aut_perms,
    digit_planes,
    element_orbit_reps,
    group_from_key,
    homocyclic_group,
    neg_table,
    orbit_min_pairs,
    orbit_min_third_reps,
)
from .sequences import GroupSequence, canonical_form

# sampled automorphisms used for in-subtree pruning, and the depth they cover
CANON_SAMPLE = 256
CANON_DEPTH = 4
CANON_SEED = 20240801

WITNESS_CAP = 64


@dataclass
class Budget:
    """Node and wall-clock limits for a search; None means unlimited."""

    max_nodes: int | None = None
    max_seconds: float | None = None

    def node_limit(self) -> int:
        return self.max_nodes if self.max_nodes is not None else 0

    def deadline_from(self, start: float) -> float:
        return start + self.max_seconds if self.max_seconds is not None else 0.0


@dataclass(frozen=True)
class ExtremalCertificate:
    """Outcome of an invariant search.

    ``value`` is the exact invariant when ``exhaustive`` is set, otherwise the
    best proven lower bound.  ``extremal_sequences`` are surviving sequences
    of length value - 1, one per equivalence class when deduplication was
    possible; ``witnesses_complete`` says no witness was dropped to caps.
    """

    invariant: str
    group: GroupSpec
    value: int
    extremal_sequences: tuple[GroupSequence, ...]
    exhaustive: bool
    witnesses_complete: bool
    nodes: int
    elapsed: float

    def to_json_dict(self) -> dict:
        from .sequences import format_sequence

        return {
            "schema": "zerosum.certificate/1",
            "invariant": self.invariant,
            "group": self.group.key,
            "value": self.value,
            "exhaustive": self.exhaustive,
            "witnesses_complete": self.witnesses_complete,
            "extremal_sequences": [format_sequence(s) for s in self.extremal_sequences],
            "nodes": self.nodes,
            "elapsed_seconds": round(self.elapsed, 6),
        }


# -- search context -----------------------------------------------------------


@dataclass
class _Ctx:
    G: GroupSpec
    invariant: str
    mode: int
    L: int
    maxmult: np.ndarray
    aut: np.ndarray | None
    canon_depth: int


def _element_orders(G: GroupSpec) -> np.ndarray:
    planes = digit_planes(G)
    out = np.ones(G.order, dtype=np.int64)
    for i, n in enumerate(G.invariant_factors):
        out = np.lcm(out, n // np.gcd(planes[i], n))
    return out


@lru_cache(maxsize=None)
def _canon_perm_table(G: GroupSpec) -> np.ndarray | None:
    """Automorphism permutations used for in-subtree pruning (or None)."""
    if not G.homocyclic or G.order == 1:
        return None
    full = aut_perms(G)
    if full is not None and len(full) <= CANON_SAMPLE:
        table = full
    else:
        table = aut_perm_sample(G, CANON_SAMPLE, seed=CANON_SEED)
    if len(table) <= 1:  # identity only
        return None
    return table


def _make_ctx(G: GroupSpec, invariant: str) -> _Ctx:
    if invariant == "s":
        mode, L = 0, G.exponent
        maxmult = np.full(G.order, max(L - 1, 0), dtype=np.int32)
    elif invariant == "g":
        mode, L = 0, G.exponent
        maxmult = np.ones(G.order, dtype=np.int32)
    elif invariant == "D":
        mode, L = 1, 0
        maxmult = (_element_orders(G) - 1).astype(np.int32)
    else:
        raise ValueError(f"unknown invariant {invariant!r}")
    return _Ctx(G, invariant, mode, L, maxmult, _canon_perm_table(G), CANON_DEPTH)


def _prefix_alive(ctx: _Ctx, prefix: tuple[int, ...]) -> bool:
    items = sorted(
        (e, prefix.count(e)) for e in set(prefix)
    )
    if ctx.mode == 0:
        return not _kernel.zs_fixed_has(ctx.G.order, add_table(ctx.G), items, ctx.L)
    return not _kernel.zs_any_has(ctx.G.order, add_table(ctx.G), items)


def _first_elements(ctx: _Ctx) -> list[int]:
    G = ctx.G
    if ctx.invariant in ("s", "g"):
        return [0] if G.order >= 1 else []
    reps = element_orbit_reps(G)
    if reps is None:
        reps = list(range(G.order))
    return [e for e in reps if ctx.maxmult[e] > 0]


def _expand_roots(ctx: _Ctx) -> tuple[list[tuple[int, ...]], int, list[tuple[int, ...]], int]:
    """Depth-two roots; returns (roots, max_alive_len, frontier_witnesses, nodes).

    When a level empties before depth two, the returned witnesses are the
    last nonempty frontier (they are then the extremal sequences).
    """
    G = ctx.G
    nodes = 0
    level0: list[tuple[int, ...]] = [()]
    level1: list[tuple[int, ...]] = []
    for e in _first_elements(ctx):
        nodes += 1
        if _prefix_alive(ctx, (e,)):
            level1.append((e,))
    if not level1:
        return [], 0, [()], nodes
    pairs = orbit_min_pairs(G) if G.homocyclic else None
    level2: list[tuple[int, ...]] = []
    for (a,) in level1:
        for b in range(a, G.order):
            if (a, b) == (a, a) and ctx.maxmult[a] < 2:
                continue
            if pairs is not None and (a, b) not in pairs:
                continue
            nodes += 1
            if _prefix_alive(ctx, (a, b)):
                level2.append((a, b))
    if not level2:
        return [], 1, level1, nodes
    return sorted(level2), 2, sorted(level2), nodes


# -- subtree execution ----------------------------------------------------------


def _run_subtree(args):
    (group_key, invariant, prefix, node_budget, deadline, witness_cap) = args
    G = group_from_key(group_key)
    ctx = _make_ctx(G, invariant)
    return _kernel.extremal_subtree(
        G.order,
        add_table(G),
        ctx.L,
        ctx.maxmult,
        prefix,
        ctx.aut,
        ctx.canon_depth,
        node_budget,
        deadline,
        witness_cap,
        ctx.mode,
    )


def _merge_extremal(results: Iterable[dict], base_len: int, base_wits) -> dict:
    best = base_len
    witnesses = list(base_wits)
    overflow = False
    nodes = 0
    truncated = False
    for res in results:
        nodes += res["nodes"]
        truncated = truncated or res["truncated"]
        if res["max_len"] > best:
            best = res["max_len"]
            witnesses = list(res["witnesses"])
            overflow = res["witness_overflow"]
        elif res["max_len"] == best:
            witnesses.extend(res["witnesses"])
            overflow = overflow or res["witness_overflow"]
    witnesses = [w for w in witnesses if len(w) == best]
    return {
        "max_len": best,
        "witnesses": witnesses,
        "overflow": overflow,
        "nodes": nodes,
        "truncated": truncated,
    }


def _dedup_witnesses(
    G: GroupSpec, invariant: str, witnesses: list[tuple[int, ...]]
) -> tuple[GroupSequence, ...]:
    seqs = [GroupSequence.from_elements(G, w) for w in witnesses]
    if not G.homocyclic or G.order > 256:
        uniq = {s.expanded(): s for s in seqs}
        return tuple(uniq[k] for k in sorted(uniq))
    out: dict[tuple[int, ...], GroupSequence] = {}
    for s in seqs:
        c = canonical_form(s, translations=invariant != "D")
        out.setdefault(c.expanded(), c)
    return tuple(out[k] for k in sorted(out))


def _search_invariant(
    G: GroupSpec,
    invariant: str,
    budget: Budget | None = None,
    workers: int = 1,
    witness_cap: int = WITNESS_CAP,
) -> ExtremalCertificate:
    budget = budget or Budget()
    start = time.monotonic()
    deadline = budget.deadline_from(start)
    if G.order == 1:
        empty = GroupSequence.empty(G)
        return ExtremalCertificate(invariant, G, 1, (empty,), True, True, 0, 0.0)

    ctx = _make_ctx(G, invariant)
    roots, base_len, base_wits, nodes0 = _expand_roots(ctx)
    node_limit = budget.node_limit()

    results = []
    consumed = nodes0
    truncated_early = False
    if roots:
        if workers <= 1:
            for prefix in roots:
                limit = node_limit - consumed if node_limit else 0
                if node_limit and limit <= 0:
                    truncated_early = True
                    break
                if deadline and time.monotonic() > deadline:
                    truncated_early = True
                    break
                res = _run_subtree(
                    (G.key, invariant, prefix, limit, deadline, witness_cap)
                )
                consumed += res["nodes"]
                results.append(res)
        else:
            limit = node_limit - consumed if node_limit else 0
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [
                    pool.submit(
                        _run_subtree,
                        (G.key, invariant, prefix, limit, deadline, witness_cap),
                    )
                    for prefix in roots
                ]
                results = [fut.result() for fut in futs]

    merged = _merge_extremal(results, base_len, base_wits)
    total_nodes = nodes0 + merged["nodes"]
    exhaustive = not merged["truncated"] and not truncated_early
    value = merged["max_len"] + 1
    extremal = _dedup_witnesses(G, invariant, merged["witnesses"])
    complete = exhaustive and not merged["overflow"]
    return ExtremalCertificate(
        invariant,
        G,
        value,
        extremal,
        exhaustive,
        complete,
        total_nodes,
        time.monotonic() - start,
    )


def davenport(G: GroupSpec, budget: Budget | None = None, workers: int = 1) -> ExtremalCertificate:
    """Davenport constant: 1 + the longest zero-sum-free sequence length."""
    return _search_invariant(G, "D", budget, workers)


def egz_constant(G: GroupSpec, budget: Budget | None = None, workers: int = 1) -> ExtremalCertificate:
    """EGZ constant: 1 + the longest length avoiding zero-sums of length exp(G)."""
    return _search_invariant(G, "s", budget, workers)


def g_constant(G: GroupSpec, budget: Budget | None = None, workers: int = 1) -> ExtremalCertificate:
    """Squarefree variant of the EGZ constant (multiplicities at most one)."""
    return _search_invariant(G, "g", budget, workers)


def check_prop41_chain(G: GroupSpec, s_val: int, g_val: int) -> bool:
    """The sandwich g <= s <= (g - 1)(exp(G) - 1) + 1."""
    n = G.exponent
    return g_val <= s_val <= (g_val - 1) * (n - 1) + 1


def harborth_sequence(G: GroupSpec) -> GroupSequence:
    """The corner construction: every 0/1 coordinate vector, n - 1 times each.

    Over C_n^r it has length 2^r (n - 1) and no zero-sum subsequence of
    length n, witnessing the classical lower bound for the EGZ constant.
    """
    n = G.exponent
    if n < 2:
        return GroupSequence.empty(G)
    counts = []
    for mask in range(2 ** G.rank):
        coords = tuple((mask >> i) & 1 for i in range(G.rank))
        counts.append((G.pack(G.element(coords)), n - 1))
    return GroupSequence.from_counts(G, counts)


# -- affine cap search -----------------------------------------------------------


@dataclass(frozen=True)
class CapSearchResult:
    dimension: int
    size: int
    caps: tuple[tuple[int, ...], ...]
    exhaustive: bool
    witnesses_complete: bool
    nodes: int
    elapsed: float

    def cap_points(self, idx: int = 0) -> list[tuple[int, ...]]:
        G = homocyclic_group(3, self.dimension)
        return [G.unpack(p).coords for p in self.caps[idx]]

    def to_json_dict(self) -> dict:
        return {
            "schema": "zerosum.cap/1",
            "r": self.dimension,
            "size": self.size,
            "exhaustive": self.exhaustive,
            "witnesses_complete": self.witnesses_complete,
            "caps": [list(c) for c in self.caps],
            "nodes": self.nodes,
            "elapsed_seconds": round(self.elapsed, 6),
        }


def is_cap(r: int, points: Iterable[int]) -> bool:
    """No three distinct points of the set sum to zero in C_3^r."""
    G = homocyclic_group(3, r)
    pts = sorted(set(points))
    add = add_table(G)
    neg = neg_table(G)
    index = set(pts)
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            c = int(neg[add[a][b]])
            if c in index and c != a and c != b:
                return False
    return True


CAP_CANON_DEPTH = 8


@lru_cache(maxsize=None)
def _cap_canon_table(r: int) -> np.ndarray | None:
    if r < 2:
        return None
    return affine_perm_sample(homocyclic_group(3, r), CANON_SAMPLE, seed=CANON_SEED)


@lru_cache(maxsize=None)
def _cap_layer_tables(r: int) -> tuple[np.ndarray, int]:
    """Layer index of every point for every line direction (as functionals)."""
    G = homocyclic_group(3, r)
    planes = digit_planes(G)
    rows = []
    for mask in range(1, 3 ** r):
        f = G.unpack(mask).coords
        first = next(c for c in f if c)
        if first != 1:
            continue
        rows.append(sum(fc * planes[i] for i, fc in enumerate(f)) % 3)
    table = np.asarray(rows, dtype=np.int32)
    return table, len(rows)


def max_cap(
    r: int,
    budget: Budget | None = None,
    workers: int = 1,
    witness_cap: int = WITNESS_CAP,
) -> CapSearchResult:
    """Maximum size of a cap in C_3^r by exhaustive branch and bound.

    The first two points are pinned to 0 and e_1 (the affine group is
    transitive on ordered pairs of distinct points) and third points range
    over orbit-minimal representatives only; deeper prefixes are discarded
    when a sampled affine map sorts them lower.  Each direction's three
    layers are bounded by the maximum cap one dimension down, and the count
    of remaining unblocked points bounds every branch.
    """
    if r < 1:
        raise ValueError("cap dimension must be >= 1")
    budget = budget or Budget()
    start = time.monotonic()
    deadline = budget.deadline_from(start)
    G = homocyclic_group(3, r)
    prefix = (0, 1)
    node_limit = budget.node_limit()
    if G.order <= 3:
        roots: list[tuple[int, ...]] = []
    else:
        blocked = int(neg_table(G)[add_table(G)[0][1]])
        roots = [
            (0, 1, x)
            for x in orbit_min_third_reps(G)
            if x >= 2 and x != blocked
        ]
    if not roots:
        merged = {
            "max_size": 2 if G.order >= 2 else 1,
            "witnesses": [prefix if G.order >= 2 else (0,)],
            "nodes": 0,
            "truncated": False,
            "witness_overflow": False,
        }
    elif workers <= 1:
        results = []
        consumed = 0
        for root in roots:
            limit = node_limit - consumed if node_limit else 0
            if node_limit and limit <= 0:
                results.append(
                    {"max_size": 2, "witnesses": [prefix], "nodes": 0,
                     "truncated": True, "witness_overflow": False}
                )
                break
            res = _cap_root_task((r, root, limit, deadline, witness_cap))
            consumed += res["nodes"]
            results.append(res)
        merged = _merge_cap(results, prefix)
    else:
        limit = node_limit
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_cap_root_task, (r, root, limit, deadline, witness_cap))
                for root in roots
            ]
            merged = _merge_cap([fut.result() for fut in futs], prefix)
    caps = sorted(set(tuple(w) for w in merged["witnesses"] if len(w) == merged["max_size"]))
    return CapSearchResult(
        r,
        merged["max_size"],
        tuple(caps),
        not merged["truncated"],
        not merged["truncated"] and not merged["witness_overflow"],
        merged["nodes"],
        time.monotonic() - start,
    )


def _cap_root_task(args):
    r, root, node_limit, deadline, witness_cap = args
    G = homocyclic_group(3, r)
    third = neg_table(G)[add_table(G)]
    dir_layers, n_dirs = _cap_layer_tables(r) if r >= 2 else (None, 0)
    layer_cap = max_cap(r - 1, Budget(), 1, witness_cap=1).size if r >= 2 else 0
    return _kernel.cap_subtree(
        G.order,
        third,
        dir_layers,
        n_dirs,
        layer_cap,
        root,
        root[-1] + 1,
        0,
        _cap_canon_table(r),
        CAP_CANON_DEPTH,
        node_limit,
        deadline,
        witness_cap,
    )


def _merge_cap(results, prefix):
    best = len(prefix)
    witnesses = [prefix]
    overflow = False
    nodes = 0
    truncated = False
    for res in results:
        nodes += res["nodes"]
        truncated = truncated or res["truncated"]
        if res["max_size"] > best:
            best = res["max_size"]
            witnesses = list(res["witnesses"])
            overflow = res["witness_overflow"]
        elif res["max_size"] == best:
            witnesses.extend(res["witnesses"])
            overflow = overflow or res["witness_overflow"]
    return {
        "max_size": best,
        "witnesses": witnesses,
        "nodes": nodes,
        "truncated": truncated,
        "witness_overflow": overflow,
    }
