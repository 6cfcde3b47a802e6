"""Brute-force reference solvers.

Everything here enumerates.  These routines are the yardstick the real solvers
are measured against, so they stay deliberately simple and share no search
logic with them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .exact_linalg import lp_bounds, lp_feasible
from .groups import GroupElement

BUDGET = 10**7


class OracleError(RuntimeError):
    pass


class BudgetExceeded(OracleError):
    pass


class UnboundedError(OracleError):
    pass


@dataclass(frozen=True)
class BoundedBox:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise OracleError("box dimension mismatch")

    @property
    def volume(self) -> int:
        v = 1
        for lo, hi in zip(self.lower, self.upper):
            v *= max(0, hi - lo + 1)
        return v

    @classmethod
    def of(cls, pairs: Sequence[tuple[int, int]]) -> BoundedBox:
        return cls(tuple(int(p[0]) for p in pairs), tuple(int(p[1]) for p in pairs))


def lp_box(T: Sequence[Sequence[int]], b: Sequence[int], n: int, box: BoundedBox | None = None) -> BoundedBox | None:
    """Per-coordinate integer bounds from exact LP extremes; None if empty."""
    lower, upper = [], []
    if T and not lp_feasible(T, b):
        return None
    for j in range(n):
        c = [int(i == j) for i in range(n)]
        bd = lp_bounds(T, b, c) if T else (None, None)
        if bd is None:
            return None
        lo, hi = bd
        if box is not None:
            lo = box.lower[j] if lo is None else max(math.ceil(lo), box.lower[j])
            hi = box.upper[j] if hi is None else min(math.floor(hi), box.upper[j])
        if lo is None or hi is None:
            raise UnboundedError(f"variable {j} is unbounded; supply an explicit box")
        lower.append(math.ceil(lo))
        upper.append(math.floor(hi))
    return BoundedBox(tuple(lower), tuple(upper))


def _fits_int64(T, b, box: BoundedBox) -> bool:
    lim = 2**60
    mx = max([abs(v) for r in T for v in r] + [1])
    mb = max([abs(v) for v in box.lower + box.upper] + [1])
    return mx * mb * (len(box.lower) + 1) < lim and all(abs(v) < lim for v in b)


def _enumerate_python(T, b, box: BoundedBox, limit: int) -> list[tuple[int, ...]]:
    n = len(box.lower)
    out: list[tuple[int, ...]] = []
    for x in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(box.lower, box.upper))):
        if all(sum(a * v for a, v in zip(row, x)) <= bi for row, bi in zip(T, b)):
            out.append(tuple(x))
            if len(out) > limit:
                raise BudgetExceeded("too many points")
    return out if n else [()]


def enumerate_points(T: Sequence[Sequence[int]], b: Sequence[int], box: BoundedBox | None = None, budget: int = BUDGET, n: int | None = None) -> list[tuple[int, ...]]:
    """All integer points of {x : Tx <= b} (inside `box` if given), lexicographic."""
    if n is None:
        n = len(T[0]) if T else (len(box.lower) if box else 0)
    bx = lp_box(T, b, n, box)
    if bx is None:
        return []
    if bx.volume > budget:
        raise BudgetExceeded(f"box volume {bx.volume} exceeds budget {budget}")
    if any(lo > hi for lo, hi in zip(bx.lower, bx.upper)):
        return []
    if not T:
        return [tuple(x) for x in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(bx.lower, bx.upper)))]
    if not _fits_int64(T, b, bx):
        return _enumerate_python(T, b, bx, budget)
    pts = _kernels.enumerate_box(np.array(T), np.array(b), np.array(bx.lower), np.array(bx.upper), budget)
    if pts is None:
        raise BudgetExceeded("more points than the budget allows")
    return [tuple(int(v) for v in row) for row in pts]


@dataclass
class OracleResult:
    feasible: bool
    witness: tuple | None
    values: dict = field(default_factory=dict)  # group value -> first point attaining it
    points: int = 0


def group_values(points: Sequence[tuple], gamma: Sequence[GroupElement], G) -> dict:
    vals: dict = {}
    if not points:
        return vals
    P = np.array(points, dtype=object)
    res = []
    for i, m in enumerate(G.moduli):
        coeff = np.array([g.residues[i] for g in gamma], dtype=object)
        res.append([int(v) % m for v in P.dot(coeff)] if len(gamma) else [0] * len(points))
    for idx, p in enumerate(points):
        g = GroupElement(G, tuple(r[idx] for r in res))
        if g not in vals:
            vals[g] = p
    return vals


def brute_gctuf(inst, box: BoundedBox | None = None, budget: int = BUDGET) -> OracleResult:
    if box is None and inst.box is not None:
        box = BoundedBox.of(inst.box)
    pts = enumerate_points(inst.T, inst.b, box, budget, n=inst.n)
    vals = group_values(pts, inst.gamma, inst.G)
    hits = [vals[r] for r in vals if r in inst.R]
    witness = min(hits) if hits else None
    return OracleResult(witness is not None, witness, vals, len(pts))


# ---------------------------------------------------------------- patterns


def _sub(T, rows, cols):
    return [[T[i][j] for j in cols] for i in rows]


def a_problem(T, b, node, alpha: int, beta: int):
    A = _sub(T, node.rows_A, node.cols_A)
    h = list(node.h)
    M = A + [h, [-v for v in h]]
    rhs = [b[i] - alpha * e for i, e in zip(node.rows_A, node.e)] + [beta, -beta]
    return M, rhs


def b_problem(T, b, node, alpha: int, beta: int):
    B = _sub(T, node.rows_B, node.cols_B)
    f = list(node.f)
    M = B + [f, [-v for v in f]]
    rhs = [b[i] - beta * g for i, g in zip(node.rows_B, node.g)] + [alpha, -alpha]
    return M, rhs


@dataclass
class BrutePattern:
    pi_A: dict  # (alpha, beta) -> {group value: x_A}
    pi_B: dict
    points_A: dict  # (alpha, beta) -> list of x_A
    points_B: dict

    @property
    def pairs(self) -> list:
        return sorted(self.pi_A)


def linking_range(inst, node) -> tuple[tuple[int, int], tuple[int, int]] | None:
    n = inst.n
    cf = [0] * n
    ch = [0] * n
    for j, v in zip(node.cols_B, node.f):
        cf[j] = v
    for j, v in zip(node.cols_A, node.h):
        ch[j] = v
    ba = lp_bounds(inst.T, inst.b, cf)
    bb = lp_bounds(inst.T, inst.b, ch)
    if ba is None or bb is None:
        return None
    if None in ba or None in bb:
        raise UnboundedError("linking values are unbounded")
    return (math.ceil(ba[0]), math.floor(ba[1])), (math.ceil(bb[0]), math.floor(bb[1]))


def brute_pattern(inst, node, budget: int = BUDGET) -> BrutePattern:
    """Exact pi_A and pi_B over every pair where both subproblems are feasible."""
    rng = linking_range(inst, node)
    out = BrutePattern({}, {}, {}, {})
    if rng is None:
        return out
    (a0, a1), (b0, b1) = rng
    G = inst.G
    gA = [inst.gamma[j] for j in node.cols_A]
    gB = [inst.gamma[j] for j in node.cols_B]
    for alpha in range(a0, a1 + 1):
        for beta in range(b0, b1 + 1):
            MA, rA = a_problem(inst.T, inst.b, node, alpha, beta)
            MB, rB = b_problem(inst.T, inst.b, node, alpha, beta)
            if not (lp_feasible(MA, rA) and lp_feasible(MB, rB)):
                continue
            pa = enumerate_points(MA, rA, budget=budget, n=len(node.cols_A))
            pb = enumerate_points(MB, rB, budget=budget, n=len(node.cols_B))
            if not pa or not pb:
                continue
            out.points_A[(alpha, beta)] = pa
            out.points_B[(alpha, beta)] = pb
            out.pi_A[(alpha, beta)] = group_values(pa, gA, G)
            out.pi_B[(alpha, beta)] = group_values(pb, gB, G)
    return out


# ---------------------------------------------------------------- lattices


def lattice_members(n: int, arcs: Sequence[tuple[int, int]]) -> list[frozenset]:
    """All predecessor-closed subsets of {0..n-1}."""
    if n > 24:
        raise BudgetExceeded("ground set too large for subset enumeration")
    preds = [0] * n
    for u, v in arcs:
        preds[v] |= 1 << u
    out = []
    for mask in range(1 << n):
        ok = True
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            if preds[v] & ~mask:
                ok = False
                break
            m ^= low
        if ok:
            out.append(frozenset(i for i in range(n) if mask >> i & 1))
    return out


def brute_gclf(inst) -> list[frozenset]:
    """Every lattice member X with gamma(X) = r."""
    dag = inst.lattice
    out = []
    for X in lattice_members(dag.n, dag.arcs):
        v = inst.G.zero
        for x in X:
            v = v + inst.gamma[x]
        if v == inst.r:
            out.append(X)
    return out


# ---------------------------------------------------------------- circulations


def all_circulations(n_vertices: int, arcs: Sequence[tuple[int, int]], caps: Sequence[int], budget: int = BUDGET) -> list[tuple[int, ...]]:
    """Every integral circulation 0 <= f <= u, checked vertex by vertex."""
    m = len(arcs)
    last = [-1] * n_vertices
    for idx, (t, h) in enumerate(arcs):
        last[t] = max(last[t], idx)
        last[h] = max(last[h], idx)
    closes: list[list[int]] = [[] for _ in range(m)]
    for v in range(n_vertices):
        if last[v] >= 0:
            closes[last[v]].append(v)
    out: list[tuple[int, ...]] = []
    bal = [0] * n_vertices
    f = [0] * m

    def rec(i: int):
        if i == m:
            out.append(tuple(f))
            if len(out) > budget:
                raise BudgetExceeded("too many circulations")
            return
        t, h = arcs[i]
        for val in range(caps[i] + 1):
            f[i] = val
            bal[t] -= val
            bal[h] += val
            if all(bal[v] == 0 for v in closes[i]):
                rec(i + 1)
            bal[t] += val
            bal[h] -= val
        f[i] = 0

    rec(0)
    return out


@dataclass
class GccOracleResult:
    feasible: bool
    flow: tuple | None
    length: int | None
    count: int


def brute_gcc(gcc, lengths: Sequence[int] | None = None) -> GccOracleResult:
    """Minimum-length circulation meeting the group target, by enumeration."""
    lengths = gcc.lengths if lengths is None else lengths
    best = None
    circs = all_circulations(gcc.n_vertices, gcc.arcs, gcc.caps)
    for f in circs:
        v = gcc.G.zero
        for eta, x in zip(gcc.labels, f):
            if x:
                v = v + x * eta
        if v != gcc.target:
            continue
        ln = sum(l * x for l, x in zip(lengths, f))
        if best is None or ln < best[0] or (ln == best[0] and f < best[1]):
            best = (ln, f)
    if best is None:
        return GccOracleResult(False, None, None, len(circs))
    return GccOracleResult(True, best[1], best[0], len(circs))
