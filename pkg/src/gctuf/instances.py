"""Problem instances shared by the solvers and the oracle."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .exact_linalg import key
from .groups import AbelianGroup, GroupElement, TargetSet


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class GctufInstance:
    """Tx <= b, x integral, gamma^T x in R.

    A single target r is the special case R = {r}.  `box` optionally bounds the
    variables for the oracle; it is not part of the feasible region seen by the
    solvers, so a bounded relaxation is expected whenever both are compared.
    """

    T: tuple
    b: tuple
    G: AbelianGroup
    gamma: tuple
    R: TargetSet
    box: tuple | None = None
    objective: tuple | None = None
    decomposition: object = field(default=None, compare=False)

    def __post_init__(self):
        T = key(self.T)
        b = tuple(int(v) for v in self.b)
        gamma = tuple(g if isinstance(g, GroupElement) else self.G.element(g) for g in self.gamma)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "gamma", gamma)
        if len(b) != len(T):
            raise InstanceError(f"rhs length {len(b)} != row count {len(T)}")
        n = len(gamma)
        if T and len(T[0]) != n:
            raise InstanceError(f"{len(T[0])} columns but {n} group labels")
        if any(g.group != self.G for g in gamma) or self.R.group != self.G:
            raise InstanceError("labels or targets from a different group")
        if self.box is not None:
            box = tuple((int(lo), int(hi)) for lo, hi in self.box)
            if len(box) != n:
                raise InstanceError("box dimension mismatch")
            object.__setattr__(self, "box", box)

    @property
    def n(self) -> int:
        return len(self.gamma)

    @property
    def k(self) -> int:
        return len(self.T)

    @property
    def depth(self) -> int:
        return self.R.depth

    def group_value(self, x: Sequence[int]) -> GroupElement:
        v = self.G.zero
        for g, xi in zip(self.gamma, x):
            if xi:
                v = v + xi * g
        return v

    def satisfies_system(self, x: Sequence[int]) -> bool:
        return all(sum(a * v for a, v in zip(row, x)) <= bi for row, bi in zip(self.T, self.b))

    def is_solution(self, x: Sequence[int] | None) -> bool:
        if x is None or len(x) != self.n:
            return False
        if any(int(v) != v for v in x):
            return False
        return self.satisfies_system(x) and self.group_value(x) in self.R

    def with_targets(self, R: TargetSet) -> GctufInstance:
        return replace(self, R=R, decomposition=None)

    def with_rhs(self, b: Sequence[int]) -> GctufInstance:
        return replace(self, b=tuple(b), decomposition=None)

    def cache_key(self) -> tuple:
        return (self.T, self.b, self.G.moduli, tuple(g.residues for g in self.gamma), tuple(sorted(r.residues for r in self.R.elements)))


RGctufInstance = GctufInstance


def make_instance(T, b, moduli, labels, targets, box=None, objective=None) -> GctufInstance:
    """Build an instance from plain integers: labels and targets as residue lists."""
    G = AbelianGroup(tuple(moduli))
    gamma = tuple(G.element(g) for g in labels)
    R = TargetSet.of(G, targets)
    return GctufInstance(T, b, G, gamma, R, box=box, objective=objective)
