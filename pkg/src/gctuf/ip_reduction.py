"""From strictly Delta-modular IPs to TU problems with congruency constraints.

With H an n x n row submatrix of A of determinant +-Delta, substituting
y = Hx turns Ax <= b into T y <= b with T = A H^{-1}, and the integrality of
x into H^{-1} y in Z^n.  The latter is a set of congruencies read off the Smith
form of Delta * frac(H^{-1}).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact_linalg import (
    RankDeficientError,
    as_matrix,
    delta_modularity,
    determinant,
    inverse,
    matmul,
    ncols,
    rank,
    smith_normal_form,
    tu_check,
)
from .groups import AbelianGroup, TargetSet
from .instances import GctufInstance


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class IpInstance:
    """min c^T x subject to Ax <= b, x integral."""

    A: tuple
    b: tuple
    c: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(int(v) for v in r) for r in self.A))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        if self.c is not None:
            object.__setattr__(self, "c", tuple(int(v) for v in self.c))
        if len(self.b) != len(self.A):
            raise ReductionError("rhs length does not match the row count")

    @property
    def n(self) -> int:
        return ncols(self.A)

    def is_feasible(self, x: Sequence[int]) -> bool:
        return all(sum(a * v for a, v in zip(r, x)) <= bi for r, bi in zip(self.A, self.b))


@dataclass(frozen=True)
class Congruency:
    gamma: tuple
    r: int
    m: int

    def holds(self, y: Sequence[int]) -> bool:
        return (sum(g * v for g, v in zip(self.gamma, y)) - self.r) % self.m == 0


@dataclass(frozen=True)
class McctuInstance:
    T: tuple
    b: tuple
    congruencies: tuple
    c_bar: tuple | None = None

    def is_feasible(self, y: Sequence[int]) -> bool:
        return all(sum(a * v for a, v in zip(r, y)) <= bi for r, bi in zip(self.T, self.b)) and all(
            cg.holds(y) for cg in self.congruencies
        )

    @property
    def modulus_product(self) -> int:
        return math.prod(cg.m for cg in self.congruencies)


def find_max_minor_submatrix(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], tuple[int, ...]]:
    """First n-subset of rows (lexicographic, 0-based) whose minor has maximum |det|."""
    M = as_matrix(A)
    n = ncols(M)
    delta, _ = delta_modularity(M)
    for rows in itertools.combinations(range(len(M)), n):
        H = [list(M[i]) for i in rows]
        if abs(determinant(H)) == delta:
            return H, rows
    raise RankDeficientError("no maximal minor found")  # unreachable for full column rank


def greedy_max_minor(A: Sequence[Sequence[int]], delta: int) -> tuple[list[list[int]], tuple[int, ...]] | None:
    """Row-exchange heuristic for inputs past the enumeration cap; verified before return."""
    M = as_matrix(A)
    n = ncols(M)
    rows: list[int] = []
    for i in range(len(M)):
        trial = rows + [i]
        sub = [M[r] for r in trial]
        if rank(sub) == len(trial):
            rows = trial
        if len(rows) == n:
            break
    if len(rows) < n:
        return None
    improved = True
    while improved:
        improved = False
        cur = abs(determinant([M[r] for r in rows]))
        for pos in range(n):
            for i in range(len(M)):
                if i in rows:
                    continue
                trial = sorted(rows[:pos] + [i] + rows[pos + 1 :])
                d = abs(determinant([M[r] for r in trial]))
                if d > cur:
                    rows, cur, improved = trial, d, True
                    break
            if improved:
                break
    H = [list(M[r]) for r in rows]
    return (H, tuple(rows)) if abs(determinant(H)) == delta else None


def reduce_ip(ip: IpInstance, tu_cap: int = 8) -> tuple[McctuInstance, list[list[int]]]:
    """Equivalent TU system with congruencies on y = Hx; returns (instance, H)."""
    delta, strict = delta_modularity(ip.A)
    if not strict:
        raise ReductionError(f"matrix is {delta}-modular but not strictly")
    H, _ = find_max_minor_submatrix(ip.A)
    Hinv = inverse(H)
    Tf = matmul(ip.A, Hinv)
    if any(v.denominator != 1 for r in Tf for v in r):
        raise ReductionError("A H^-1 is not integral")
    T = [[int(v) for v in r] for r in Tf]
    if not tu_check(T, cap=tu_cap).is_tu:
        raise ReductionError("A H^-1 is not totally unimodular; the input is not strictly Delta-modular")
    n = len(H)
    HF = [[v - math.floor(v) for v in r] for r in Hinv]
    HFt = [[int(delta * v) for v in r] for r in HF]
    snf = smith_normal_form(HFt)
    cong = []
    for i, mt in enumerate(snf.diagonal()):
        m = delta // math.gcd(delta, mt)
        cong.append(Congruency(tuple(snf.U[i]), 0, m))
    c_bar = None
    if ip.c is not None:
        c_bar = tuple(sum(Fraction(ip.c[i]) * Hinv[i][j] for i in range(n)) for j in range(n))
    out = McctuInstance(tuple(map(tuple, T)), ip.b, tuple(cong), c_bar)
    if out.modulus_product != delta:
        raise ReductionError(f"moduli multiply to {out.modulus_product}, expected {delta}")
    return out, H


def congruencies_to_group(mcctu: McctuInstance) -> GctufInstance:
    """One cyclic factor per congruency with modulus > 1."""
    kept = [cg for cg in mcctu.congruencies if cg.m > 1]
    G = AbelianGroup(tuple(cg.m for cg in kept))
    n = ncols(mcctu.T) if mcctu.T else (len(kept[0].gamma) if kept else 0)
    gamma = tuple(G.element(tuple(cg.gamma[j] for cg in kept)) for j in range(n))
    R = TargetSet.of(G, [tuple(cg.r for cg in kept)])
    return GctufInstance(mcctu.T, mcctu.b, G, gamma, R)


def group_to_congruencies(inst: GctufInstance) -> list[McctuInstance]:
    """One congruency system per target element."""
    out = []
    for r in inst.R:
        cong = tuple(
            Congruency(tuple(g.residues[i] for g in inst.gamma), r.residues[i], m) for i, m in enumerate(inst.G.moduli)
        )
        out.append(McctuInstance(inst.T, inst.b, cong))
    return out


def lift_solution(y: Sequence[int], H: Sequence[Sequence[int]]) -> list[int]:
    """x = H^{-1} y."""
    x = [sum(Fraction(a) * v for a, v in zip(row, y)) for row in inverse(H)]
    if any(v.denominator != 1 for v in x):
        raise ReductionError("H^-1 y is not integral; y violates the congruencies")
    return [int(v) for v in x]


def split_signs(ip: IpInstance) -> IpInstance:
    """x = x+ - x- with x+, x- >= 0, for totally Delta-modular inputs."""
    n = ip.n
    A = [list(r) + [-v for v in r] for r in ip.A]
    A += [[-int(i == j) for j in range(2 * n)] for i in range(2 * n)]
    b = list(ip.b) + [0] * (2 * n)
    c = None if ip.c is None else tuple(ip.c) + tuple(-v for v in ip.c)
    return IpInstance(A, b, c)
