"""Exhaustive verification of the inverse-structure properties of the EGZ
constant, with resumable checkpoints, plus the constructive product step.

``verify_d0`` settles, for a homocyclic group C_n^r and a size c, whether
every sequence g * T^(n-1) with |T| = c has a zero-sum subsequence of length
n.  The pair (g, T) is normalized by translating g to 0 (translation by -g
preserves length-n zero-sums because n * g = 0), so the search runs over
multisets T only, built one element at a time.  Adding elements only adds
subsequences, so a prefix whose sequence already contains the target zero-sum
can never extend to a counterexample: the DFS keeps exactly the zero-sum-free
branches and a surviving depth-c leaf is a counterexample.

Symmetry reduction mirrors the invariant searches: orbit-minimal first
elements, orbit-minimal depth-two pairs, sampled automorphism pruning below.
Roots are processed in a fixed order; checkpoints record the completed-root
statistics and the pending roots, so a resumed run reproduces the verdict and
counts of an uninterrupted one bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import _kernel
from .errors import (
    CheckpointError,
    NonExhaustiveCertificate,
    OracleFailure,
    UnsupportedGroup,
)
from .groups import (
    GroupElement,
    GroupSpec,
    add_table,
    element_orbit_reps,
    group_from_key,
    homocyclic_group,
    orbit_min_pairs,
)
from .search import Budget, CANON_DEPTH, ExtremalCertificate, _canon_perm_table
from .sequences import (
    GroupSequence,
    find_zero_sum_fixed_length,
    has_zero_sum_fixed_length,
)

CHECKPOINT_VERSION = 1
CHECKPOINT_EVERY_NODES = 10_000_000


@dataclass(frozen=True)
class D0Verdict:
    """Outcome of a distinguished-element property verification."""

    group: GroupSpec
    c: int
    outcome: str  # "holds" | "counterexample" | "inconclusive"
    witness_g: GroupElement | None
    witness_t: GroupSequence | None
    nodes_explored: int
    orbits_tested: int
    elapsed: float
    checkpoint_path: str | None = None

    @property
    def holds(self) -> bool:
        return self.outcome == "holds"

    def to_json_dict(self) -> dict:
        from .sequences import format_sequence

        out = {
            "schema": "zerosum.d0_verdict/1",
            "group": self.group.key,
            "n": self.group.exponent,
            "r": self.group.rank,
            "c": self.c,
            "outcome": self.outcome,
            "nodes_explored": self.nodes_explored,
            "orbits_tested": self.orbits_tested,
            "elapsed_seconds": round(self.elapsed, 6),
        }
        if self.witness_t is not None:
            out["witness_g"] = list(self.witness_g.coords)
            out["witness_t"] = format_sequence(self.witness_t)
        if self.checkpoint_path:
            out["checkpoint"] = self.checkpoint_path
        return out


def _d0_items(n: int, prefix: tuple[int, ...]) -> list[tuple[int, int]]:
    counts: dict[int, int] = {0: 1}
    for e in prefix:
        counts[e] = counts.get(e, 0) + (n - 1)
    return sorted(counts.items())


def _d0_prefix_alive(G: GroupSpec, prefix: tuple[int, ...]) -> bool:
    n = G.exponent
    return not _kernel.zs_fixed_has(G.order, add_table(G), _d0_items(n, prefix), n)


def _d0_roots(G: GroupSpec, c: int) -> tuple[list[tuple[int, ...]], int, int]:
    """Depth-min(2, c) roots; returns (roots, root_depth, expansion_nodes)."""
    depth = min(2, c)
    nodes = 0
    reps = element_orbit_reps(G) or list(range(G.order))
    level1 = []
    for e in reps:
        nodes += 1
        if _d0_prefix_alive(G, (e,)):
            level1.append((e,))
    if depth == 1:
        return sorted(level1), 1, nodes
    pairs = orbit_min_pairs(G)
    level2 = []
    for (a,) in level1:
        for b in range(a, G.order):
            if pairs is not None and (a, b) not in pairs:
                continue
            nodes += 1
            if _d0_prefix_alive(G, (a, b)):
                level2.append((a, b))
    return sorted(level2), 2, nodes


def _state_digest(G: GroupSpec, prefix: tuple[int, ...]) -> str:
    """Digest of the DP state after pushing the prefix (resume integrity check)."""
    n = G.exponent
    from ._kernel import _pure

    rows = _pure._state_new(n)
    add = add_table(G).tolist()
    _pure._state_push(rows, add[0], 1, n)
    for e in prefix:
        _pure._state_push(rows, add[e], n - 1, n)
    blob = json.dumps([sorted(r) for r in rows]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class SearchCheckpoint:
    """Resumable state of a verify_d0 run (completed-root granularity)."""

    group: GroupSpec
    c: int
    root_depth: int
    roots_total: int
    roots_digest: str
    pending: list[tuple[tuple[int, ...], str]]  # (prefix, DP state digest)
    nodes_done: int
    orbits_done: int
    version: int = CHECKPOINT_VERSION

    def save(self, path: str | Path) -> None:
        data = {
            "schema": "zerosum.checkpoint/1",
            "version": self.version,
            "group": self.group.key,
            "c": self.c,
            "root_depth": self.root_depth,
            "roots_total": self.roots_total,
            "roots_digest": self.roots_digest,
            "pending": [[list(p), d] for p, d in self.pending],
            "nodes_done": self.nodes_done,
            "orbits_done": self.orbits_done,
        }
        Path(path).write_text(json.dumps(data, indent=1) + "\n")

    @staticmethod
    def load(path: str | Path) -> "SearchCheckpoint":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
        if data.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint version {data.get('version')} unsupported"
            )
        return SearchCheckpoint(
            group=group_from_key(data["group"]),
            c=int(data["c"]),
            root_depth=int(data["root_depth"]),
            roots_total=int(data["roots_total"]),
            roots_digest=data["roots_digest"],
            pending=[(tuple(p), d) for p, d in data["pending"]],
            nodes_done=int(data["nodes_done"]),
            orbits_done=int(data["orbits_done"]),
        )


def _roots_digest(roots: list[tuple[int, ...]]) -> str:
    blob = json.dumps([list(r) for r in roots]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _d0_subtree_task(args):
    group_key, c, prefix, node_budget, deadline = args
    G = group_from_key(group_key)
    return _kernel.d0_subtree(
        G.order,
        add_table(G),
        G.exponent,
        c,
        prefix,
        _canon_perm_table(G),
        CANON_DEPTH,
        node_budget,
        deadline,
    )


def verify_d0(
    G: GroupSpec,
    c: int,
    budget: Budget | None = None,
    checkpoint: SearchCheckpoint | str | Path | None = None,
    checkpoint_path: str | Path | None = None,
    checkpoint_every: int = CHECKPOINT_EVERY_NODES,
    workers: int = 1,
) -> D0Verdict:
    """Decide whether every g * T^(n-1) with |T| = c has a length-n zero-sum.

    A counterexample is reported in normalized form (g = 0); budget
    exhaustion yields an inconclusive verdict and, when ``checkpoint_path``
    is given, a checkpoint usable with ``checkpoint=`` to resume.
    """
    if not G.homocyclic or G.exponent < 2:
        raise UnsupportedGroup(f"{G} is not homocyclic with exponent >= 2")
    if c < 1:
        raise ValueError("c must be >= 1")
    budget = budget or Budget()
    start = time.monotonic()
    deadline = budget.deadline_from(start)
    node_limit = budget.node_limit()

    roots, root_depth, nodes0 = _d0_roots(G, c)
    digest = _roots_digest(roots)

    if checkpoint is not None:
        ck = (
            checkpoint
            if isinstance(checkpoint, SearchCheckpoint)
            else SearchCheckpoint.load(checkpoint)
        )
        if ck.group != G or ck.c != c:
            raise CheckpointError(
                f"checkpoint is for {ck.group}, c={ck.c}; requested {G}, c={c}"
            )
        if ck.roots_digest != digest or ck.root_depth != root_depth:
            raise CheckpointError("checkpoint root frontier does not match this run")
        for prefix, d in ck.pending:
            if _state_digest(G, prefix) != d:
                raise CheckpointError(f"DP state digest mismatch for root {prefix}")
        pending = [p for p, _ in ck.pending]
        nodes_done, orbits_done = ck.nodes_done, ck.orbits_done
    else:
        pending = list(roots)
        nodes_done, orbits_done = nodes0, len(roots)

    def make_verdict(outcome, ce, nodes, orbits, ck_path=None):
        witness_g = witness_t = None
        if ce is not None:
            witness_g = G.identity()
            witness_t = GroupSequence.from_elements(G, ce)
            seq = _seq_for_pair(G, witness_g, witness_t)
            if has_zero_sum_fixed_length(seq, G.exponent):
                raise RuntimeError("counterexample failed revalidation")
        return D0Verdict(
            G,
            c,
            outcome,
            witness_g,
            witness_t,
            nodes,
            orbits,
            time.monotonic() - start,
            str(ck_path) if ck_path else None,
        )

    if root_depth >= c and pending:
        # roots are complete candidates already; the least one is a counterexample
        return make_verdict("counterexample", pending[0], nodes_done, orbits_done)
    if not pending:
        return make_verdict("holds", None, nodes_done, orbits_done)

    def save_checkpoint(pend):
        if checkpoint_path is None:
            return None
        ck = SearchCheckpoint(
            group=G,
            c=c,
            root_depth=root_depth,
            roots_total=len(roots),
            roots_digest=digest,
            pending=[(p, _state_digest(G, p)) for p in pend],
            nodes_done=nodes_done,
            orbits_done=orbits_done,
        )
        ck.save(checkpoint_path)
        return checkpoint_path

    results = _run_roots(
        G, c, pending, node_limit, nodes_done, deadline, workers
    )
    since_save = 0
    for i, res in enumerate(results):
        if res is None:  # budget exhausted before this root started
            path = save_checkpoint(pending[i:])
            return make_verdict("inconclusive", None, nodes_done, orbits_done, path)
        if res["truncated"]:
            path = save_checkpoint(pending[i:])
            return make_verdict(
                "inconclusive",
                None,
                nodes_done + res["nodes"],
                orbits_done + res["orbits"],
                path,
            )
        nodes_done += res["nodes"]
        orbits_done += res["orbits"]
        since_save += res["nodes"]
        if res["counterexample"] is not None:
            return make_verdict(
                "counterexample", res["counterexample"], nodes_done, orbits_done
            )
        if checkpoint_path is not None and since_save >= checkpoint_every:
            save_checkpoint(pending[i + 1 :])
            since_save = 0
    return make_verdict("holds", None, nodes_done, orbits_done)


def _run_roots(G, c, pending, node_limit, nodes_base, deadline, workers):
    """Yield per-root kernel results in root order; None when budget ran out."""
    if workers <= 1:
        consumed = nodes_base

        def gen():
            nonlocal consumed
            for prefix in pending:
                limit = node_limit - consumed if node_limit else 0
                if node_limit and limit <= 0:
                    yield None
                    return
                if deadline and time.monotonic() > deadline:
                    yield None
                    return
                res = _d0_subtree_task((G.key, c, prefix, limit, deadline))
                consumed += res["nodes"]
                yield res

        return gen()

    limit = node_limit - nodes_base if node_limit else 0

    def gen_parallel():
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_d0_subtree_task, (G.key, c, prefix, limit, deadline))
                for prefix in pending
            ]
            try:
                for fut in futs:
                    res = fut.result()
                    yield res
                    if res is not None and (
                        res["counterexample"] is not None or res["truncated"]
                    ):
                        break
            finally:
                for fut in futs:
                    fut.cancel()

    return gen_parallel()


def _seq_for_pair(G: GroupSpec, g: GroupElement, T: GroupSequence) -> GroupSequence:
    """The sequence g * T^(n-1)."""
    n = G.exponent
    counts = [(G.pack(g), 1)]
    counts.extend((e, m * (n - 1)) for e, m in T.items)
    return GroupSequence.from_counts(G, counts)


# -- full-structure verification -----------------------------------------------


@dataclass(frozen=True)
class DVerdict:
    holds: bool
    c: int | None
    violators: tuple[GroupSequence, ...]

    def to_json_dict(self) -> dict:
        from .sequences import format_sequence

        return {
            "schema": "zerosum.d_verdict/1",
            "holds": self.holds,
            "c": self.c,
            "violators": [format_sequence(s) for s in self.violators],
        }


def verify_d(G: GroupSpec, cert: ExtremalCertificate) -> DVerdict:
    """Check that every extremal sequence of the EGZ search is a perfect
    (n-1)-st power, i.e. all multiplicities divisible by exp(G) - 1.

    Needs an exhaustive s-certificate for G with a complete witness list;
    the multiplicity profile is affine-invariant, so checking the stored
    representatives suffices.
    """
    if cert.invariant != "s" or cert.group != G:
        raise NonExhaustiveCertificate(
            f"need an s-certificate for {G}, got {cert.invariant} for {cert.group}"
        )
    if not cert.exhaustive or not cert.witnesses_complete:
        raise NonExhaustiveCertificate(
            "certificate must be exhaustive with a complete witness list"
        )
    n = G.exponent
    if n < 2:
        return DVerdict(True, cert.value - 1, ())
    violators = tuple(
        s
        for s in cert.extremal_sequences
        if any(m % (n - 1) for _, m in s.items)
    )
    if violators:
        return DVerdict(False, None, violators)
    if (cert.value - 1) % (n - 1):
        return DVerdict(False, None, cert.extremal_sequences)
    return DVerdict(True, (cert.value - 1) // (n - 1), ())


# -- constructive product step ----------------------------------------------------


def d0_compose(
    m: int,
    n: int,
    G: GroupSpec,
    S: GroupSequence,
    d0_oracle_m=None,
    d0_oracle_n=None,
    g0: GroupElement | None = None,
) -> GroupSequence:
    """Extract a zero-sum subsequence of length m*n from S = g0 * prod gi^(mn-1).

    Implements the constructive product argument: multiplication by m maps G
    onto a copy of C_n^r with kernel a copy of C_m^r; blocks gi^n carry the
    residual sequence into the kernel, where a second length-m zero-sum over
    block sums assembles the final witness.  The oracles produce the two
    inner witnesses (defaults: the DP search); failure of either signals a
    false premise and raises OracleFailure.
    """
    if m < 1 or n < 1 or m * n < 2:
        raise ValueError("need m, n >= 1 with m*n >= 2")
    if not G.homocyclic or G.exponent != m * n:
        raise UnsupportedGroup(f"group must be homocyclic of exponent {m * n}")
    r = G.rank
    mn = m * n
    if (S.length - 1) % (mn - 1):
        raise ValueError("sequence length does not fit the shape g0 * prod gi^(mn-1)")
    c = (S.length - 1) // (mn - 1)

    g0p, tail = _split_shape(G, S, mn, g0)
    Gm = homocyclic_group(m, r)
    Gn = homocyclic_group(n, r)
    oracle_m = d0_oracle_m or (lambda seq, L: find_zero_sum_fixed_length(seq, L))
    oracle_n = d0_oracle_n or (lambda seq, L: find_zero_sum_fixed_length(seq, L))

    # residual T = g0 * prod gi^(n-1); its image generates the first witness
    t_counts: dict[int, int] = {g0p: 1}
    for e, mult in tail.items():
        t_counts[e] = t_counts.get(e, 0) + (n - 1)
    T = GroupSequence.from_counts(G, t_counts.items())

    def to_image(e: int) -> int:
        coords = G.unpack(e).coords
        return Gn.pack(Gn.element(tuple(x % n for x in coords)))

    image_T = GroupSequence.from_counts(
        Gn, ((to_image(e), mult) for e, mult in T.items)
    )
    w_image = oracle_n(image_T, n)
    if w_image is None or w_image.length != n or w_image.sum != Gn.identity():
        raise OracleFailure("image-level oracle produced no length-n zero-sum")

    s0 = _lift_witness(G, T, w_image, to_image)

    # kernel-level sequence: sigma(S_0), then n*gi with multiplicity m-1 each
    def to_kernel(e: int) -> int:
        coords = G.unpack(e).coords
        if any(x % n for x in coords):
            raise RuntimeError("element is not in the kernel of multiplication by m")
        return Gm.pack(Gm.element(tuple(x // n for x in coords)))

    sigma_s0 = G.pack(s0.sum)
    block_sums = []  # (kernel element, block index list)
    kernel_counts: dict[int, list[int]] = {}
    kernel_counts.setdefault(to_kernel(sigma_s0), []).append(0)
    block_of: dict[int, tuple[int, ...]] = {0: None}
    k = 1
    gi_list = sorted(tail.items())
    for gi, _ in gi_list:
        ngi = _scale_packed(G, n, gi)
        for _ in range(m - 1):
            kernel_counts.setdefault(to_kernel(ngi), []).append(k)
            block_of[k] = (gi,)
            k += 1
    kernel_seq = GroupSequence.from_counts(
        Gm, ((e, len(ids)) for e, ids in kernel_counts.items())
    )
    w_kernel = oracle_m(kernel_seq, m)
    if w_kernel is None or w_kernel.length != m or w_kernel.sum != Gm.identity():
        raise OracleFailure("kernel-level oracle produced no length-m zero-sum")

    # pick concrete block indices realizing the kernel witness
    out_counts: dict[int, int] = {}
    for e, mult in w_kernel.items:
        ids = kernel_counts[e][:mult]
        for k_id in ids:
            if k_id == 0:
                for x, cnt in s0.items:
                    out_counts[x] = out_counts.get(x, 0) + cnt
            else:
                (gi,) = block_of[k_id]
                out_counts[gi] = out_counts.get(gi, 0) + n
    result = GroupSequence.from_counts(G, out_counts.items())

    if result.length != mn:
        raise RuntimeError(f"composed witness has length {result.length}, not {mn}")
    if result.sum != G.identity():
        raise RuntimeError("composed witness does not sum to zero")
    if not result.is_subsequence_of(S):
        raise RuntimeError("composed witness is not a subsequence of the input")
    return result


def _split_shape(G, S, mn, g0):
    """Identify the distinguished element and the base multiset of the shape."""
    if g0 is not None:
        g0p = G.pack(g0)
        counts = dict(S.items)
        if counts.get(g0p, 0) < 1:
            raise ValueError("declared distinguished element does not occur")
        counts[g0p] -= 1
        if any(v % (mn - 1) for v in counts.values()):
            raise ValueError("sequence does not have the shape g0 * prod gi^(mn-1)")
        tail = GroupSequence.from_counts(
            G, ((e, v // (mn - 1)) for e, v in counts.items() if v)
        )
        return g0p, tail
    if mn - 1 < 2:
        raise ValueError("shape is ambiguous for m*n = 2; pass g0 explicitly")
    marked = [e for e, v in S.items if v % (mn - 1) == 1]
    if len(marked) != 1 or any(v % (mn - 1) not in (0, 1) for _, v in S.items):
        raise ValueError("sequence does not have the shape g0 * prod gi^(mn-1)")
    return _split_shape(G, S, mn, G.unpack(marked[0]))


def _lift_witness(G, T, w_image, to_image) -> GroupSequence:
    """Choose concrete elements of T realizing an image-level witness."""
    need = dict(w_image.items)
    picked: dict[int, int] = {}
    for e, mult in T.items:
        img = to_image(e)
        want = need.get(img, 0)
        if want:
            take = min(want, mult)
            picked[e] = take
            need[img] = want - take
    if any(need.values()):
        raise OracleFailure("image witness is not liftable; oracle returned junk")
    return GroupSequence.from_counts(G, picked.items())


def _scale_packed(G: GroupSpec, k: int, e: int) -> int:
    coords = G.unpack(e).coords
    return G.pack(G.element(tuple(k * x for x in coords)))
