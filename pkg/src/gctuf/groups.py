"""Finite abelian groups written as products of cyclic factors.

Elements are residue vectors.  Everything here is immutable, so groups,
elements and subgroups can be shared freely and used as dict keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .exact_linalg import smith_normal_form

SUBGROUP_CAP = 64


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class AbelianGroup:
    moduli: tuple[int, ...]

    def __post_init__(self):
        mods = tuple(int(m) for m in self.moduli)
        if any(m < 1 for m in mods):
            raise GroupError(f"moduli must be >= 1, got {mods}")
        object.__setattr__(self, "moduli", mods)

    @property
    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def zero(self) -> GroupElement:
        return GroupElement(self, (0,) * len(self.moduli))

    def element(self, residues: Iterable[int] | int) -> GroupElement:
        if isinstance(residues, int):
            residues = (residues,)
        res = tuple(int(r) for r in residues)
        if len(res) != len(self.moduli):
            raise GroupError(f"element {res} has wrong length for group {self.moduli}")
        return GroupElement(self, tuple(r % m for r, m in zip(res, self.moduli)))

    def elements(self) -> list[GroupElement]:
        return [GroupElement(self, r) for r in itertools.product(*(range(m) for m in self.moduli))]

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements())

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        if not self.moduli:
            return "Z/1"
        return "x".join(f"Z/{m}" for m in self.moduli)

    def invariant_form(self) -> AbelianGroup:
        """Isomorphic group with moduli d_1 | d_2 | ... and no factor 1."""
        if not self.moduli:
            return self
        diag = [[self.moduli[i] if i == j else 0 for j in range(len(self.moduli))] for i in range(len(self.moduli))]
        d = smith_normal_form(diag).diagonal()
        return AbelianGroup(tuple(x for x in d if x != 1))


@dataclass(frozen=True)
class GroupElement:
    group: AbelianGroup
    residues: tuple[int, ...]

    def _check(self, other: GroupElement) -> None:
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise GroupError("group mismatch")

    def __add__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(
            self.group,
            tuple((a + b) % m for a, b, m in zip(self.residues, other.residues, self.group.moduli)),
        )

    def __neg__(self) -> GroupElement:
        return GroupElement(self.group, tuple((-a) % m for a, m in zip(self.residues, self.group.moduli)))

    def __sub__(self, other: GroupElement) -> GroupElement:
        return self + (-other)

    def __rmul__(self, n: int) -> GroupElement:
        n = int(n)
        return GroupElement(self.group, tuple((n * a) % m for a, m in zip(self.residues, self.group.moduli)))

    def __mul__(self, n: int) -> GroupElement:
        return self.__rmul__(n)

    def is_zero(self) -> bool:
        return not any(self.residues)

    def order(self) -> int:
        k = 1
        g = self
        while not g.is_zero():
            g = g + self
            k += 1
        return k

    def __repr__(self) -> str:
        return "[" + ",".join(str(r) for r in self.residues) + "]"


@dataclass(frozen=True)
class TargetSet:
    group: AbelianGroup
    elements: frozenset

    def __post_init__(self):
        els = frozenset(self.elements)
        for e in els:
            if e.group != self.group:
                raise GroupError("target element from another group")
        object.__setattr__(self, "elements", els)

    @property
    def depth(self) -> int:
        return self.group.order - len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements, key=lambda e: e.residues))

    def shift(self, g: GroupElement) -> TargetSet:
        """R - g."""
        return TargetSet(self.group, frozenset(r - g for r in self.elements))

    def complement(self) -> TargetSet:
        return TargetSet(self.group, frozenset(e for e in self.group.elements() if e not in self.elements))

    @classmethod
    def full(cls, G: AbelianGroup) -> TargetSet:
        return cls(G, frozenset(G.elements()))

    @classmethod
    def of(cls, G: AbelianGroup, elements: Iterable) -> TargetSet:
        return cls(G, frozenset(e if isinstance(e, GroupElement) else G.element(e) for e in elements))


@dataclass(frozen=True)
class Subgroup:
    group: AbelianGroup
    elements: frozenset

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_trivial(self) -> bool:
        return len(self.elements) == 1

    def is_whole(self) -> bool:
        return len(self.elements) == self.group.order

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.elements

    def __iter__(self):
        return iter(sorted(self.elements, key=lambda e: e.residues))

    def generators(self) -> list[GroupElement]:
        """A small generating set, picked greedily."""
        gens: list[GroupElement] = []
        span = {self.group.zero}
        for g in sorted(self.elements, key=lambda e: (-e.order(), e.residues)):
            if g not in span:
                gens.append(g)
                span = _closure(span | {g})
        return gens


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def scalar_mul(n: int, g: GroupElement) -> GroupElement:
    return n * g


def _closure(gens: set) -> frozenset:
    elems = set(gens)
    frontier = list(elems)
    while frontier:
        new = []
        for a in frontier:
            for b in list(elems):
                c = a + b
                if c not in elems:
                    elems.add(c)
                    new.append(c)
        frontier = new
    return frozenset(elems)


def subgroup_generated(*gens: GroupElement) -> Subgroup:
    if not gens:
        raise GroupError("need at least one generator")
    G = gens[0].group
    return Subgroup(G, _closure({G.zero, *gens}))


def all_subgroups(G: AbelianGroup, cap: int = SUBGROUP_CAP) -> list[Subgroup]:
    """Every subgroup exactly once, sorted by order then by elements."""
    if G.order > cap:
        raise GroupError(f"|G|={G.order} exceeds subgroup enumeration cap {cap}")
    found = {frozenset({G.zero})}
    frontier = list(found)
    elems = G.elements()
    # every subgroup of a finite group is reached by adding generators one at a time
    while frontier:
        nxt = []
        for H in frontier:
            for g in elems:
                if g in H:
                    continue
                K = _closure(set(H) | {g})
                if K not in found:
                    found.add(K)
                    nxt.append(K)
        frontier = nxt
    subs = [Subgroup(G, H) for H in found]
    subs.sort(key=lambda S: (S.order, sorted(e.residues for e in S.elements)))
    return subs


def is_coset_union(R: TargetSet, H: Subgroup) -> bool:
    return all((r + h) in R.elements for r in R.elements for h in H.elements)


class QuotientMap:
    """Surjection G -> G/H given by a row transform coming from a Smith form."""

    def __init__(self, source: AbelianGroup, target: AbelianGroup, rows: list[list[int]], kernel: Subgroup):
        self.source = source
        self.target = target
        self.rows = rows
        self.kernel = kernel

    def __call__(self, g: GroupElement) -> GroupElement:
        if g.group != self.source:
            raise GroupError("group mismatch")
        return self.target.element(sum(c * x for c, x in zip(row, g.residues)) for row in self.rows)

    def image(self, elements: Iterable[GroupElement]) -> frozenset:
        return frozenset(self(g) for g in elements)

    def section(self) -> dict:
        """One representative in G for each element of G/H."""
        reps: dict = {}
        for g in self.source.elements():
            reps.setdefault(self(g), g)
        return reps


def quotient(G: AbelianGroup, H: Subgroup) -> tuple[AbelianGroup, QuotientMap]:
    """G/H in invariant-factor form.

    G = Z^k / diag(m) Z^k, so G/H = Z^k / L where L is spanned by the moduli
    columns and generators of H.  With L = S D U from the Smith form, x lies in
    L exactly when S^{-1} x is divisible entrywise by the diagonal of D.
    """
    k = G.rank
    if k == 0:
        return G, QuotientMap(G, G, [], H)
    gens = H.generators()
    rel = [[(G.moduli[i] if i == j else 0) for j in range(k)] + [g.residues[i] for g in gens] for i in range(k)]
    snf = smith_normal_form(rel)
    diag = snf.diagonal()
    keep = [i for i, d in enumerate(diag) if d != 1]
    target = AbelianGroup(tuple(diag[i] for i in keep))
    rows = [snf.S_inv[i] for i in keep]
    return target, QuotientMap(G, target, rows, H)


def find_vanishing_subset(seq: Sequence[GroupElement]) -> tuple[int, ...] | None:
    """Zero-sum prefix or interval of seq, as 0-based indices.

    Prefix sums s_0 = 0, s_1, ..., s_l live in a group of order |G|, so once
    l >= |G| two of them coincide and the interval between them sums to zero.
    """
    if not seq:
        return None
    G = seq[0].group
    seen = {G.zero: 0}
    s = G.zero
    for i, g in enumerate(seq, start=1):
        s = s + g
        if s in seen:
            return tuple(range(seen[s], i))
        seen[s] = i
    return None


def groups_up_to(order: int) -> list[AbelianGroup]:
    """Every factor list (non-decreasing, factors >= 2) with product <= order."""
    out = [AbelianGroup(())]

    def rec(prefix: tuple[int, ...], prod: int, lo: int):
        for m in range(lo, order // prod + 1):
            nxt = prefix + (m,)
            out.append(AbelianGroup(nxt))
            rec(nxt, prod * m, m)

    rec((), 1, 2)
    return out
