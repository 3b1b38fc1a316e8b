"""Sequences (finite multisets) over a finite abelian group.

Provides the multiset algebra — shifting by an element, pushing through a
homomorphism — and the two zero-sum detection predicates that everything else
builds on: "has a zero-sum subsequence of length exactly L" and "has a
nonempty zero-sum subsequence".  Both are dynamic programs over packed
elements; witnesses are reconstructed from the DP tables.

Text format (one sequence per file or string)::

    # comment lines and blank lines are ignored
    group: 3,3
    2 x (1,2)
    1 x (0,1)

Element lines are ``<multiplicity> x (c1,...,cr)``; the header names the
invariant factors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

from . import _kernel
from .errors import InvalidHomomorphism, SequenceFormatError
from .groups import (
    GroupElement,
    GroupSpec,
    add_table,
    canonical_packed_multiset,
    make_group,
)


@dataclass(frozen=True)
class GroupSequence:
    """An immutable multiset of group elements with cached length and sum.

    ``items`` maps packed elements to positive multiplicities, stored as a
    sorted tuple of (packed, mult) pairs.
    """

    group: GroupSpec
    items: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for e, m in self.items:
            if m <= 0:
                raise ValueError(f"multiplicity {m} for element {e} must be positive")
            if not 0 <= e < self.group.order:
                raise ValueError(f"packed element {e} outside group of order {self.group.order}")
        if list(self.items) != sorted(self.items):
            raise ValueError("items must be sorted by packed element")
        if len({e for e, _ in self.items}) != len(self.items):
            raise ValueError("items must not repeat elements")

    # -- construction ---------------------------------------------------------

    @staticmethod
    def from_counts(G: GroupSpec, counts: Iterable[tuple[int, int]]) -> "GroupSequence":
        merged: dict[int, int] = {}
        for e, m in counts:
            if m:
                merged[e] = merged.get(e, 0) + m
        return GroupSequence(G, tuple(sorted(merged.items())))

    @staticmethod
    def from_elements(G: GroupSpec, elems: Iterable) -> "GroupSequence":
        """Build from an iterable of GroupElement, coordinate tuples, or packed ints."""
        counts: dict[int, int] = {}
        for x in elems:
            if isinstance(x, GroupElement):
                p = G.pack(x)
            elif isinstance(x, int):
                if not 0 <= x < G.order:
                    raise ValueError(f"packed element {x} out of range")
                p = x
            else:
                p = G.pack(G.element(x))
            counts[p] = counts.get(p, 0) + 1
        return GroupSequence(G, tuple(sorted(counts.items())))

    @staticmethod
    def empty(G: GroupSpec) -> "GroupSequence":
        return GroupSequence(G, ())

    # -- basic queries ---------------------------------------------------------

    @cached_property
    def length(self) -> int:
        return sum(m for _, m in self.items)

    @cached_property
    def sum(self) -> GroupElement:
        coords = [0] * self.group.rank
        for e, m in self.items:
            elem = self.group.unpack(e)
            for i, (c, n) in enumerate(zip(elem.coords, self.group.invariant_factors)):
                coords[i] = (coords[i] + m * c) % n
        return GroupElement(tuple(coords))

    def multiplicity(self, x) -> int:
        p = x if isinstance(x, int) else self.group.pack(x)
        for e, m in self.items:
            if e == p:
                return m
        return 0

    def support(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.items)

    def expanded(self) -> tuple[int, ...]:
        """The multiset as a nondecreasing tuple of packed elements."""
        out: list[int] = []
        for e, m in self.items:
            out.extend([e] * m)
        return tuple(out)

    def iter_elements(self) -> Iterator[GroupElement]:
        for e, m in self.items:
            elem = self.group.unpack(e)
            for _ in range(m):
                yield elem

    def is_subsequence_of(self, other: "GroupSequence") -> bool:
        if self.group != other.group:
            return False
        return all(m <= other.multiplicity(e) for e, m in self.items)

    def is_squarefree(self) -> bool:
        return all(m == 1 for _, m in self.items)

    def __str__(self) -> str:
        if not self.items:
            return "(empty)"
        parts = []
        for e, m in self.items:
            s = repr(self.group.unpack(e))
            parts.append(s if m == 1 else f"{s}^{m}")
        return "*".join(parts)


# -- multiset algebra ----------------------------------------------------------


def seq_shift(S: GroupSequence, g: GroupElement) -> GroupSequence:
    """The translated sequence g + S."""
    G = S.group
    G.check(g)
    gp = G.pack(g)
    row = add_table(G)[gp]
    return GroupSequence.from_counts(G, ((int(row[e]), m) for e, m in S.items))


@dataclass(frozen=True)
class Homomorphism:
    """A homomorphism between groups given by an integer matrix on coordinates.

    ``matrix`` has shape (target rank, source rank); the image of x is
    M x reduced modulo the target's invariant factors.  Validity requires
    n_j * (j-th column) = 0 in the target for every source factor n_j.
    """

    source: GroupSpec
    target: GroupSpec
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.matrix) != self.target.rank:
            raise InvalidHomomorphism("matrix row count must equal target rank")
        for row in self.matrix:
            if len(row) != self.source.rank:
                raise InvalidHomomorphism("matrix column count must equal source rank")
        for j, nj in enumerate(self.source.invariant_factors):
            for i, ti in enumerate(self.target.invariant_factors):
                if (nj * self.matrix[i][j]) % ti != 0:
                    raise InvalidHomomorphism(
                        f"matrix does not kill the order-{nj} generator "
                        f"(column {j}, row {i})"
                    )

    @staticmethod
    def multiplication_by(G: GroupSpec, m: int) -> "Homomorphism":
        matrix = tuple(
            tuple(m if i == j else 0 for j in range(G.rank)) for i in range(G.rank)
        )
        return Homomorphism(G, G, matrix)

    def apply(self, a: GroupElement) -> GroupElement:
        self.source.check(a)
        coords = tuple(
            sum(r * c for r, c in zip(row, a.coords)) % n
            for row, n in zip(self.matrix, self.target.invariant_factors)
        )
        return GroupElement(coords)

    def kernel_elements(self) -> list[GroupElement]:
        zero = self.target.identity()
        return [x for x in self.source.elements() if self.apply(x) == zero]


def seq_map(S: GroupSequence, phi: Homomorphism) -> GroupSequence:
    """The image sequence phi(S); satisfies sum(phi(S)) = phi(sum(S))."""
    if phi.source != S.group:
        raise InvalidHomomorphism("homomorphism source does not match the sequence group")
    G, H = S.group, phi.target
    return GroupSequence.from_counts(
        H, ((H.pack(phi.apply(G.unpack(e))), m) for e, m in S.items)
    )


# -- zero-sum detection ----------------------------------------------------------


def has_zero_sum_fixed_length(S: GroupSequence, L: int) -> bool:
    """True iff some subsequence T <= S has |T| = L and sum zero.

    Dynamic program over states (count, partial sum); L = 0 is True via the
    empty subsequence.
    """
    if L < 0:
        raise ValueError("subsequence length must be nonnegative")
    if L == 0:
        return True
    G = S.group
    return _kernel.zs_fixed_has(G.order, add_table(G), list(S.items), L)


def has_nonempty_zero_sum(S: GroupSequence) -> bool:
    """True iff some nonempty subsequence of S sums to zero."""
    G = S.group
    return _kernel.zs_any_has(G.order, add_table(G), list(S.items))


def find_zero_sum_fixed_length(S: GroupSequence, L: int) -> GroupSequence | None:
    """A concrete witness subsequence of length L and sum zero, if one exists.

    Backtracks through the per-item DP tables: for each item, in reverse,
    decide how many copies the witness takes.
    """
    if L < 0:
        raise ValueError("subsequence length must be nonnegative")
    G = S.group
    if L == 0:
        return GroupSequence.empty(G)
    if not has_zero_sum_fixed_length(S, L):
        return None
    items = list(S.items)
    add = add_table(G).tolist()
    stages = _kernel.zs_fixed_stages(G.order, add_table(G), items, L)
    # walk back: find (count used, remaining sum) feasible at each stage
    neg = _neg_table_list(G)
    take: list[tuple[int, int]] = []
    k, s = L, 0
    for i in range(len(items) - 1, -1, -1):
        e, mult = items[i]
        prev = stages[i]
        for c in range(0, min(mult, k) + 1):
            # subtract c copies of e from sum s
            s_prev = s
            for _ in range(c):
                s_prev = add[s_prev][neg[e]]
            if k - c <= L and s_prev in prev[k - c]:
                if c:
                    take.append((e, c))
                k, s = k - c, s_prev
                break
        else:
            raise AssertionError("DP backtrack failed; tables inconsistent")
    assert k == 0 and s == 0
    return GroupSequence.from_counts(G, take)


def _neg_table_list(G: GroupSpec) -> list[int]:
    from .groups import neg_table

    return neg_table(G).tolist()


def canonical_form(S: GroupSequence, *, translations: bool = True) -> GroupSequence:
    """The least sequence in the orbit of S under affine maps (homocyclic only).

    Two sequences have equal canonical forms iff they are affinely equivalent;
    translation preserves zero-sum subsequences of length exp(G), so the form
    also preserves that predicate.  ``translations=False`` restricts the orbit
    to automorphisms, the equivalence relevant to zero-sum-free-ness.
    """
    t = canonical_packed_multiset(
        S.group, S.expanded(), with_translations=translations
    )
    return GroupSequence.from_elements(S.group, t)


# -- text format ------------------------------------------------------------------

_ELEM_LINE = re.compile(r"^(\d+)\s*x\s*\(([^)]*)\)$")


def format_sequence(S: GroupSequence) -> str:
    lines = [f"group: {S.group.key}"]
    for e, m in S.items:
        coords = ",".join(str(c) for c in S.group.unpack(e).coords)
        lines.append(f"{m} x ({coords})")
    return "\n".join(lines) + "\n"


def parse_sequence(text: str) -> GroupSequence:
    """Parse the text format; raises SequenceFormatError with a line number."""
    group: GroupSpec | None = None
    counts: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("group:"):
            if group is not None:
                raise SequenceFormatError("duplicate group header", lineno)
            spec = line[len("group:") :].strip()
            try:
                group = make_group([int(p) for p in spec.split(",")] if spec else [])
            except Exception as exc:
                raise SequenceFormatError(f"bad group header: {exc}", lineno) from exc
            continue
        if group is None:
            raise SequenceFormatError("element line before group header", lineno)
        m = _ELEM_LINE.match(line)
        if not m:
            raise SequenceFormatError(f"malformed element line {line!r}", lineno)
        mult = int(m.group(1))
        if mult <= 0:
            raise SequenceFormatError("multiplicity must be positive", lineno)
        coords_text = m.group(2).strip()
        try:
            coords = [int(p) for p in coords_text.split(",")] if coords_text else []
            elem = group.element(coords)
        except Exception as exc:
            raise SequenceFormatError(f"bad element coordinates: {exc}", lineno) from exc
        counts.append((group.pack(elem), mult))
    if group is None:
        raise SequenceFormatError("missing group header", None)
    return GroupSequence.from_counts(group, counts)
