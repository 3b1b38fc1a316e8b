"""Finite abelian groups in invariant-factor form, with packed-index arithmetic.

A group is a chain C_{n_1} + ... + C_{n_r} with n_i | n_{i+1}.  Elements are
coordinate tuples reduced modulo the factors.  Every element also has a packed
mixed-radix index in [0, order); the dynamic programs and searches index dense
tables by that value.

The automorphism helpers only handle homocyclic groups C_n^r, where the
automorphism group is GL(r, Z_n).  They produce packed-index permutations,
either the full group (when small enough to enumerate) or a deterministic
sample, plus the generator set used for orbit walks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DivisibilityViolation,
    RankMismatch,
    ResourceLimit,
    UnsupportedGroup,
)

# Largest order for which dense |G| x |G| tables are built.
TABLE_LIMIT = 2048

# Default cap on enumerated automorphism permutations.
AUT_ENUM_LIMIT = 30_000

# Default cap on states visited by canonical-form orbit walks.
CANON_STATE_LIMIT = 2_000_000


@dataclass(frozen=True)
class GroupElement:
    """An element as a tuple of residues, coords[i] in [0, n_i)."""

    coords: tuple[int, ...]

    def __repr__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class GroupSpec:
    """A validated finite abelian group; construct through :func:`make_group`."""

    invariant_factors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def homocyclic(self) -> bool:
        """True for C_n^r (all factors equal) and for the trivial group."""
        return len(set(self.invariant_factors)) <= 1

    @property
    def key(self) -> str:
        """Canonical text form, e.g. ``3,3`` (trivial group: ``1``)."""
        if not self.invariant_factors:
            return "1"
        return ",".join(str(n) for n in self.invariant_factors)

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "C_1"
        if self.homocyclic and self.rank > 1:
            return f"C_{self.exponent}^{self.rank}"
        return " + ".join(f"C_{n}" for n in self.invariant_factors)

    # -- element plumbing ---------------------------------------------------

    def identity(self) -> GroupElement:
        return GroupElement((0,) * self.rank)

    def element(self, coords: Iterable[int]) -> GroupElement:
        """Reduce a coordinate iterable into a valid element."""
        cs = tuple(int(c) % n for c, n in zip_strict(coords, self.invariant_factors))
        return GroupElement(cs)

    def check(self, a: GroupElement) -> None:
        if len(a.coords) != self.rank:
            raise RankMismatch(
                f"element of rank {len(a.coords)} in group of rank {self.rank}"
            )

    def pack(self, a: GroupElement) -> int:
        """Mixed-radix index of an element, first coordinate fastest."""
        self.check(a)
        idx = 0
        for c, n in zip(reversed(a.coords), reversed(self.invariant_factors)):
            idx = idx * n + (c % n)
        return idx

    def unpack(self, idx: int) -> GroupElement:
        if not 0 <= idx < self.order:
            raise ValueError(f"packed index {idx} outside [0, {self.order})")
        coords = []
        for n in self.invariant_factors:
            coords.append(idx % n)
            idx //= n
        return GroupElement(tuple(coords))

    def elements(self) -> Iterator[GroupElement]:
        for idx in range(self.order):
            yield self.unpack(idx)

    def element_order(self, a: GroupElement) -> int:
        self.check(a)
        o = 1
        for c, n in zip(a.coords, self.invariant_factors):
            o = math.lcm(o, n // math.gcd(c, n))
        return o


def zip_strict(a, b):
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise RankMismatch(f"expected {len(b)} coordinates, got {len(a)}")
    return zip(a, b)


def make_group(invariant_factors: Sequence[int]) -> GroupSpec:
    """Validate a factor chain; factors equal to 1 are dropped as trivial summands."""
    factors = [int(n) for n in invariant_factors]
    if not factors:
        raise ValueError("invariant factor list must be nonempty")
    if any(n < 1 for n in factors):
        raise ValueError(f"invariant factors must be positive, got {factors}")
    for a, b in itertools.pairwise(factors):
        if b % a != 0:
            raise DivisibilityViolation(f"{a} does not divide {b}")
    return GroupSpec(tuple(n for n in factors if n > 1))


def group_from_key(key: str) -> GroupSpec:
    return make_group([int(part) for part in key.split(",")])


def homocyclic_group(n: int, r: int) -> GroupSpec:
    """C_n^r; n = 1 or r = 0 gives the trivial group."""
    if n < 1 or r < 0:
        raise ValueError(f"invalid homocyclic parameters n={n}, r={r}")
    return make_group([n] * r if r else [1])


# -- element operations -----------------------------------------------------


def elem_add(G: GroupSpec, a: GroupElement, b: GroupElement) -> GroupElement:
    G.check(a)
    G.check(b)
    return GroupElement(
        tuple((x + y) % n for x, y, n in zip(a.coords, b.coords, G.invariant_factors))
    )


def elem_neg(G: GroupSpec, a: GroupElement) -> GroupElement:
    G.check(a)
    return GroupElement(tuple((-x) % n for x, n in zip(a.coords, G.invariant_factors)))


def elem_scale(G: GroupSpec, k: int, a: GroupElement) -> GroupElement:
    G.check(a)
    return GroupElement(
        tuple((k * x) % n for x, n in zip(a.coords, G.invariant_factors))
    )


# -- dense packed tables ----------------------------------------------------


@lru_cache(maxsize=None)
def digit_planes(G: GroupSpec) -> np.ndarray:
    """coords of every packed index as an int64 array of shape (rank, order)."""
    idx = np.arange(G.order, dtype=np.int64)
    planes = np.empty((G.rank, G.order), dtype=np.int64)
    for i, n in enumerate(G.invariant_factors):
        planes[i] = idx % n
        idx = idx // n
    return planes


def _check_table_size(G: GroupSpec) -> None:
    if G.order > TABLE_LIMIT:
        raise ResourceLimit(
            f"group order {G.order} exceeds dense-table limit {TABLE_LIMIT}"
        )


@lru_cache(maxsize=None)
def add_table(G: GroupSpec) -> np.ndarray:
    """Packed addition table of shape (order, order), dtype int32."""
    _check_table_size(G)
    if G.rank == 0:
        return np.zeros((1, 1), dtype=np.int32)
    planes = digit_planes(G)
    out = np.zeros((G.order, G.order), dtype=np.int64)
    weight = 1
    for i, n in enumerate(G.invariant_factors):
        d = planes[i]
        out += ((d[:, None] + d[None, :]) % n) * weight
        weight *= n
    return out.astype(np.int32)


@lru_cache(maxsize=None)
def neg_table(G: GroupSpec) -> np.ndarray:
    """Packed negation table of shape (order,), dtype int32."""
    _check_table_size(G)
    if G.rank == 0:
        return np.zeros(1, dtype=np.int32)
    planes = digit_planes(G)
    out = np.zeros(G.order, dtype=np.int64)
    weight = 1
    for i, n in enumerate(G.invariant_factors):
        out += ((-planes[i]) % n) * weight
        weight *= n
    return out.astype(np.int32)


def pack_many(G: GroupSpec, elems: Iterable[GroupElement]) -> tuple[int, ...]:
    return tuple(G.pack(a) for a in elems)


# -- automorphisms of homocyclic groups ------------------------------------


def _require_homocyclic(G: GroupSpec) -> None:
    if not G.homocyclic:
        raise UnsupportedGroup(
            f"{G} is not homocyclic; automorphism machinery unsupported"
        )


def units(n: int) -> list[int]:
    return [u for u in range(1, n) if math.gcd(u, n) == 1]


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def gl_generator_matrices(n: int, r: int) -> list[np.ndarray]:
    """Generators of GL(r, Z_n) as integer matrices.

    Unit scalings of the first coordinate, adjacent coordinate swaps, and the
    single transvection x_0 += x_1 generate the whole group.
    """
    if r == 0 or n <= 1:
        return []
    gens = []
    for u in units(n):
        if u == 1:
            continue
        m = np.eye(r, dtype=np.int64)
        m[0, 0] = u
        gens.append(m)
    for i in range(r - 1):
        m = np.eye(r, dtype=np.int64)
        m[[i, i + 1]] = m[[i + 1, i]]
        gens.append(m)
    if r >= 2:
        m = np.eye(r, dtype=np.int64)
        m[0, 1] = 1
        gens.append(m)
    return gens


def matrix_perm(G: GroupSpec, matrix: np.ndarray) -> np.ndarray:
    """Packed-index permutation of the linear map x -> Mx (homocyclic G)."""
    _require_homocyclic(G)
    if G.rank == 0:
        return np.zeros(1, dtype=np.int32)
    n = G.exponent
    planes = digit_planes(G)
    new = (np.asarray(matrix, dtype=np.int64) @ planes) % n
    weight = 1
    out = np.zeros(G.order, dtype=np.int64)
    for i in range(G.rank):
        out += new[i] * weight
        weight *= n
    return out.astype(np.int32)


def translation_perms(G: GroupSpec) -> list[np.ndarray]:
    """Permutations x -> x + e_i for each coordinate; they generate all translations."""
    if G.rank == 0:
        return []
    perms = []
    planes = digit_planes(G)
    for i, n in enumerate(G.invariant_factors):
        weight = math.prod(G.invariant_factors[:i])
        shifted = (planes[i] + 1) % n
        perm = np.arange(G.order, dtype=np.int64) + (shifted - planes[i]) * weight
        perms.append(perm.astype(np.int32))
    return perms


@lru_cache(maxsize=None)
def aut_generator_perms(G: GroupSpec) -> tuple[np.ndarray, ...]:
    """Packed permutations generating Aut(C_n^r) = GL(r, Z_n)."""
    _require_homocyclic(G)
    return tuple(matrix_perm(G, m) for m in gl_generator_matrices(G.exponent, G.rank))


@lru_cache(maxsize=None)
def aut_perms(G: GroupSpec, limit: int = AUT_ENUM_LIMIT) -> np.ndarray | None:
    """All automorphism permutations, or None when the group exceeds ``limit``.

    Breadth-first closure of the generator permutations under composition.
    """
    _require_homocyclic(G)
    identity = np.arange(G.order, dtype=np.int32)
    gens = aut_generator_perms(G)
    seen = {identity.tobytes(): identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = g[p]
                key = q.tobytes()
                if key not in seen:
                    if len(seen) >= limit:
                        return None
                    seen[key] = q
                    nxt.append(q)
        frontier = nxt
    out = np.vstack(sorted(seen.values(), key=lambda a: a.tobytes()))
    return out.astype(np.int32)


def aut_perm_sample(G: GroupSpec, count: int, seed: int = 0) -> np.ndarray:
    """A deterministic sample of automorphism permutations (short random words)."""
    _require_homocyclic(G)
    gens = aut_generator_perms(G)
    if not gens:
        return np.arange(G.order, dtype=np.int32)[None, :]
    rng = np.random.default_rng(seed)
    identity = np.arange(G.order, dtype=np.int32)
    seen = {}
    word_len = max(4, 2 * G.rank * G.rank)
    attempts = 0
    while len(seen) < count and attempts < 20 * count:
        attempts += 1
        p = identity
        for j in rng.integers(0, len(gens), size=word_len):
            p = gens[j][p]
        seen.setdefault(p.tobytes(), p)
    return np.vstack(sorted(seen.values(), key=lambda a: a.tobytes())).astype(np.int32)


def affine_generator_perms(G: GroupSpec) -> tuple[np.ndarray, ...]:
    """Generators of the affine group: Aut(G) generators plus translations."""
    return tuple(aut_generator_perms(G)) + tuple(translation_perms(G))


def affine_perm_sample(G: GroupSpec, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic sample of affine permutations (short random words)."""
    _require_homocyclic(G)
    gens = affine_generator_perms(G)
    if not gens:
        return np.arange(G.order, dtype=np.int32)[None, :]
    rng = np.random.default_rng(seed)
    identity = np.arange(G.order, dtype=np.int32)
    seen = {}
    word_len = max(6, 2 * G.rank * G.rank)
    attempts = 0
    while len(seen) < count and attempts < 20 * count:
        attempts += 1
        p = identity
        for j in rng.integers(0, len(gens), size=word_len):
            p = gens[j][p]
        seen.setdefault(p.tobytes(), p)
    return np.vstack(sorted(seen.values(), key=lambda a: a.tobytes())).astype(np.int32)


def orbit_min_third_reps(G: GroupSpec, a: int = 0, b: int = 1) -> list[int]:
    """All x such that (a, b, x) is minimal in its affine orbit of sorted
    triples.  Scanning x in increasing order and flooding each orbit marks
    every later duplicate, so the unvisited triples are exactly the minima.
    """
    gens = [g.tolist() for g in affine_generator_perms(G)]
    visited: set[tuple[int, int, int]] = set()
    reps = []
    for x in range(G.order):
        if x == a or x == b:
            continue
        t0 = tuple(sorted((a, b, x)))
        if t0 in visited:
            continue
        reps.append(x)
        visited.add(t0)
        frontier = [t0]
        while frontier:
            nxt = []
            for t in frontier:
                for g in gens:
                    img = (g[t[0]], g[t[1]], g[t[2]])
                    s = tuple(sorted(img))
                    if s not in visited:
                        visited.add(s)
                        nxt.append(s)
            frontier = nxt
    return reps


def element_orbit_reps(G: GroupSpec) -> list[int] | None:
    """Packed representatives, minimal in their Aut(G)-orbit (homocyclic only).

    Orbits of C_n^r under GL(r, Z_n) are the content classes gcd(x, n); the
    rep of class d is the vector (d, 0, ..., 0), whose packed index is d.
    Returns None for non-homocyclic groups, where no reduction is attempted.
    """
    if not G.homocyclic:
        return None
    if G.rank == 0:
        return [0]
    n = G.exponent
    return [0] + [d for d in divisors(n) if d < n]


# -- canonical forms --------------------------------------------------------


def _tuple_key(order: int, t: tuple[int, ...]) -> bytes:
    if order <= 256:
        return bytes(t)
    return np.asarray(t, dtype=np.uint16).tobytes()


def canonical_packed_multiset(
    G: GroupSpec,
    elems: tuple[int, ...],
    *,
    with_translations: bool = True,
    state_limit: int = CANON_STATE_LIMIT,
) -> tuple[int, ...]:
    """Lexicographically least sorted packed tuple over the affine orbit.

    Walks the orbit of the multiset under the generator permutations (plus
    translations when requested) and returns its minimum, so equality of
    outputs is exactly affine (resp. linear) equivalence.
    """
    _require_homocyclic(G)
    start = tuple(sorted(elems))
    if not start or G.order == 1:
        return start
    gens = list(aut_generator_perms(G))
    if with_translations:
        gens += translation_perms(G)
    if not gens:
        return start
    gens = [g.tolist() for g in gens]
    best = start
    seen = {_tuple_key(G.order, start)}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for g in gens:
                img = tuple(sorted(g[x] for x in t))
                key = _tuple_key(G.order, img)
                if key in seen:
                    continue
                if len(seen) >= state_limit:
                    raise ResourceLimit(
                        f"canonical-form orbit exceeded {state_limit} states"
                    )
                seen.add(key)
                nxt.append(img)
                if img < best:
                    best = img
        frontier = nxt
    return best


def orbit_min_pairs(G: GroupSpec) -> set[tuple[int, int]] | None:
    """All sorted pairs (a, b) that are minimal in their Aut(G)-orbit.

    Used to seed searches at depth two.  Returns None when the group is not
    homocyclic (callers then skip the reduction).
    """
    if not G.homocyclic:
        return None
    gens = [g.tolist() for g in aut_generator_perms(G)]
    reps: set[tuple[int, int]] = set()
    visited: set[tuple[int, int]] = set()
    for a in range(G.order):
        for b in range(a, G.order):
            p = (a, b)
            if p in visited:
                continue
            # BFS the orbit of p; p is its minimum because we scan in lex order.
            reps.add(p)
            frontier = [p]
            visited.add(p)
            while frontier:
                nxt = []
                for q in frontier:
                    for g in gens:
                        x, y = g[q[0]], g[q[1]]
                        img = (x, y) if x <= y else (y, x)
                        if img not in visited:
                            visited.add(img)
                            nxt.append(img)
                frontier = nxt
    return reps
