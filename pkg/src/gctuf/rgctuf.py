"""Recursive solver for TU systems whose solution value must land in a target set.

One call at depth d = |G| - |R| does the following:

  d = 0          any integral vertex of the relaxation is a solution
  R + H = R      pass to G/H, which lowers the depth
  base block     one call to the matching base solver
  3-sum          fix the linking values (alpha, beta) = (f^T x_B, h^T x_A),
                 collect partial value sets on both sides and stitch them

A pivot node is first turned into a 3-sum by a unimodular change of variables.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .base_lattice import LatticeError, solve_transposed_network_gctuf
from .base_network import CirculationError, solve_network_gctuf
from .exact_linalg import integer_vertex, key, lp_bounds, lp_feasible, tu_check
from .groups import GroupElement, Subgroup, TargetSet, quotient
from .instances import GctufInstance
from .oracle import OracleError, brute_gctuf
from .tu_structure import (
    PIVOT_TRIAL_CAP,
    CapExceeded,
    CoreLeaf,
    NetworkLeaf,
    PivotNode,
    StructureError,
    ThreeSumNode,
    TransposedNetworkLeaf,
    base_leaf,
    find_three_sum,
    pivot,
    tree_to_text,
)

log = logging.getLogger(__name__)

MAX_DEPTH = 3
GUARD_FACTOR = 10
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


class SolverError(RuntimeError):
    pass


class DepthError(SolverError):
    pass


class RecursionBudgetExceeded(SolverError):
    pass


class LinearFitError(SolverError):
    pass


# ---------------------------------------------------------------- shapes and patterns


@dataclass(frozen=True)
class PatternShape:
    """{(a, b) : l0 <= a + b <= u0, l1 <= a <= u1, l2 <= b <= u2}."""

    l0: int
    u0: int
    l1: int
    u1: int
    l2: int
    u2: int

    def __contains__(self, p) -> bool:
        a, b = p
        return self.l0 <= a + b <= self.u0 and self.l1 <= a <= self.u1 and self.l2 <= b <= self.u2

    def pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.l1, self.u1 + 1) for b in range(self.l2, self.u2 + 1) if (a, b) in self]

    @property
    def widths(self) -> tuple[int, int, int]:
        return (self.u0 - self.l0, self.u1 - self.l1, self.u2 - self.l2)

    @classmethod
    def hull(cls, pairs: Iterable[tuple[int, int]]) -> PatternShape:
        P = list(pairs)
        if not P:
            raise SolverError("hull of an empty pair set")
        s = [a + b for a, b in P]
        return cls(min(s), max(s), min(a for a, _ in P), max(a for a, _ in P), min(b for _, b in P), max(b for _, b in P))

    def bounds(self) -> tuple:
        return ((self.l0, self.u0), (self.l1, self.u1), (self.l2, self.u2))


# value of each shape constraint at a pair, and the direction running along it
_FORMS = (lambda p: p[0] + p[1], lambda p: p[0], lambda p: p[1])
_ALONG = ((1, -1), (0, 1), (1, 0))


def _add(p, v, s: int = 1):
    return (p[0] + s * v[0], p[1] + s * v[1])


@dataclass
class Pattern:
    """pair -> {group value: witness}; witnesses may be None for hand-made tables."""

    side: str
    values: dict = field(default_factory=dict)

    def at(self, pair) -> dict:
        return self.values.get(pair, {})

    def size(self, pair) -> int:
        return len(self.values.get(pair, {}))

    @classmethod
    def of(cls, side: str, table: Mapping) -> Pattern:
        vals = {}
        for p, els in table.items():
            vals[tuple(p)] = dict(els) if isinstance(els, Mapping) else {g: None for g in els}
        return cls(side, vals)


@dataclass(frozen=True)
class PairClass:
    kinds: dict  # pair -> "interior" | "border" | "vertex"
    axes: dict  # pair -> directions v with pair +- v both present
    structure: str | None = None  # "I" .. "IV" once a B-pattern is supplied

    def of_kind(self, kind: str) -> list:
        return sorted(p for p, k in self.kinds.items() if k == kind)


def classify_pairs(shape: PatternShape | Iterable, pattern_B: Pattern | None = None) -> PairClass:
    members = set(shape.pairs()) if isinstance(shape, PatternShape) else set(map(tuple, shape))
    kinds, axes = {}, {}
    for p in sorted(members):
        ax = tuple(v for v in DIRECTIONS if _add(p, v) in members and _add(p, v, -1) in members)
        axes[p] = ax
        if all(_add(p, v) in members for v in DIRECTIONS):
            kinds[p] = "interior"
        elif len(ax) == 2:
            kinds[p] = "border"
        else:
            kinds[p] = "vertex"
    structure = None
    if pattern_B is not None:
        if all(pattern_B.size(p) == 1 for p in members):
            structure = "I"
        elif "interior" in kinds.values():
            structure = "II"
        elif "border" in kinds.values():
            structure = "III"
        else:
            structure = "IV"
    return PairClass(kinds, axes, structure)


@dataclass(frozen=True)
class Combination:
    pair: tuple
    r_A: GroupElement
    r_B: GroupElement
    x_A: tuple | None
    x_B: tuple | None


def combine_check(pattern_A: Pattern, pattern_B: Pattern, R: TargetSet | Iterable, pairs: Iterable | None = None) -> Combination | None:
    """First pair (sorted) and values r_A + r_B in R, with their witnesses."""
    Rset = R.elements if isinstance(R, TargetSet) else frozenset(R)
    if not Rset:
        return None
    todo = sorted(pattern_A.values) if pairs is None else sorted(pairs)
    for p in todo:
        pa, pb = pattern_A.at(p), pattern_B.at(p)
        for ra in sorted(pa, key=lambda g: g.residues):
            for rb in sorted(pb, key=lambda g: g.residues):
                if ra + rb in Rset:
                    return Combination(p, ra, rb, pa[ra], pb[rb])
    return None


# ---------------------------------------------------------------- instance transformations


def coset_reduce(inst: GctufInstance) -> GctufInstance:
    """Quotient by the stabiliser of R when it is non-trivial; otherwise the instance itself."""
    G = inst.G
    R = inst.R.elements
    stab = frozenset(h for h in G.elements() if all(r + h in R for r in R))
    if len(stab) <= 1 or not R:
        return inst
    Gq, q = quotient(G, Subgroup(G, stab))
    gamma = tuple(q(g) for g in inst.gamma)
    Rq = TargetSet(Gq, q.image(R))
    return GctufInstance(inst.T, inst.b, Gq, gamma, Rq, box=inst.box, objective=inst.objective)


def _orient(node: ThreeSumNode) -> ThreeSumNode:
    """Swap sides so that B has at most as many columns as A."""
    if len(node.cols_B) <= len(node.cols_A):
        return node
    return ThreeSumNode(node.rows_B, node.cols_B, node.rows_A, node.cols_A, node.g, node.h, node.e, node.f, node.shape)


def split_three_sum(inst: GctufInstance, node: ThreeSumNode, alpha: int, beta: int, R_A=None, R_B=None) -> tuple[GctufInstance, GctufInstance]:
    """A-problem [A; h; -h] x_A <= [b_A - alpha e; beta; -beta] and the matching B-problem."""
    T, b, G = inst.T, inst.b, inst.G
    A = [[T[i][j] for j in node.cols_A] for i in node.rows_A]
    B = [[T[i][j] for j in node.cols_B] for i in node.rows_B]
    h, f = list(node.h), list(node.f)
    TA = A + [h, [-v for v in h]]
    bA = [b[i] - alpha * ei for i, ei in zip(node.rows_A, node.e)] + [beta, -beta]
    TB = B + [f, [-v for v in f]]
    bB = [b[i] - beta * gi for i, gi in zip(node.rows_B, node.g)] + [alpha, -alpha]
    full = TargetSet.full(G)
    gA = tuple(inst.gamma[j] for j in node.cols_A)
    gB = tuple(inst.gamma[j] for j in node.cols_B)
    return (
        GctufInstance(TA, bA, G, gA, R_A if R_A is not None else full),
        GctufInstance(TB, bB, G, gB, R_B if R_B is not None else full),
    )


def stitch(n: int, node: ThreeSumNode, x_A: Sequence[int], x_B: Sequence[int]) -> tuple[int, ...]:
    x = [0] * n
    for j, v in zip(node.cols_A, x_A):
        x[j] = v
    for j, v in zip(node.cols_B, x_B):
        x[j] = v
    return tuple(x)


def linking_values(node: ThreeSumNode, x: Sequence[int]) -> tuple[int, int]:
    alpha = sum(fj * x[j] for j, fj in zip(node.cols_B, node.f))
    beta = sum(hj * x[j] for j, hj in zip(node.cols_A, node.h))
    return alpha, beta


@dataclass(frozen=True)
class PivotTransform:
    """y = (x with x_j replaced by row i of T applied to x); the matrix becomes pivot(T, i, j) plus a unit row."""

    instance: GctufInstance
    row: int
    col: int
    source_row: tuple

    def to_x(self, y: Sequence[int] | None) -> tuple[int, ...] | None:
        if y is None:
            return None
        j, a = self.col, self.source_row
        x = list(y)
        x[j] = a[j] * (y[j] - sum(a[l] * y[l] for l in range(len(y)) if l != j))
        return tuple(x)

    def to_y(self, x: Sequence[int]) -> tuple[int, ...]:
        y = list(x)
        y[self.col] = sum(a * v for a, v in zip(self.source_row, x))
        return tuple(y)


def pivot_transform(inst: GctufInstance, i: int, j: int) -> PivotTransform:
    """Equivalent instance whose matrix is pivot(T, i, j) with one extra unit row.

    Row i of the pivoted matrix evaluates to -x_j, so its right-hand side is the
    integral upper bound of -x_j over the relaxation; the original row i
    survives as the unit row y_j <= b_i.
    """
    T = [list(r) for r in inst.T]
    eps = T[i][j]
    if eps not in (1, -1):
        raise SolverError("pivot entry must be +-1")
    n = inst.n
    bd = lp_bounds(inst.T, inst.b, [int(l == j) for l in range(n)])
    if bd is None:
        # empty relaxation: any bound keeps it empty
        U = 0
    elif bd[0] is None:
        raise SolverError(f"variable {j} is unbounded below; pivoting needs a bound")
    else:
        U = -math.ceil(bd[0])
    P = pivot(T, i, j)
    b = list(inst.b)
    b[i] = U
    P.append([int(l == j) for l in range(n)])
    b.append(inst.b[i])
    gj = inst.gamma[j]
    gamma = [g - (eps * T[i][l]) * gj if l != j else eps * gj for l, g in enumerate(inst.gamma)]
    new = GctufInstance(P, b, inst.G, gamma, inst.R, objective=None)
    return PivotTransform(new, i, j, tuple(T[i]))


# ---------------------------------------------------------------- linear patterns


def fit_linear(pattern_B: Pattern, pairs: Iterable, G) -> tuple[GroupElement, GroupElement, GroupElement]:
    """(r0, r1, r2) with pattern_B(a, b) = {r0 + a r1 + b r2} on every pair."""
    P = sorted(pairs)
    if any(pattern_B.size(p) != 1 for p in P):
        raise LinearFitError("pattern is not single-valued on the pairs")
    val = {p: next(iter(pattern_B.at(p))) for p in P}
    els = G.elements()
    for r1 in els:
        for r2 in els:
            a0, b0 = P[0]
            r0 = val[P[0]] - a0 * r1 - b0 * r2
            if all(r0 + a * r1 + b * r2 == val[(a, b)] for a, b in P):
                return r0, r1, r2
    raise LinearFitError("no linear function reproduces the pattern")


@dataclass(frozen=True)
class Type14Reduction:
    instance: GctufInstance
    node: ThreeSumNode
    shape: PatternShape
    parent: GctufInstance
    n_vars: int

    def lift(self, y: Sequence[int] | None) -> tuple[int, ...] | None:
        if y is None:
            return None
        node = self.node
        x_A, alpha = list(y[:-1]), y[-1]
        beta = sum(hj * v for hj, v in zip(node.h, x_A))
        _, sub_B = split_three_sum(self.parent, node, alpha, beta)
        x_B = integer_vertex(sub_B.T, sub_B.b)
        if x_B is None:
            raise LinearFitError("lifted pair has an infeasible B-problem")
        return stitch(self.parent.n, node, x_A, x_B)


def type14_reduce(inst: GctufInstance, node: ThreeSumNode, pairs: Iterable, pattern_B: Pattern) -> Type14Reduction:
    """Replace the B side by one variable alpha when pi_B is linear on a pattern shape.

    The pairs must be exactly the integer points of their hull and must all be
    feasible for both sides.  Raises LinearFitError when the pattern is not
    linear, the pairs do not form a shape, or the reduced matrix is not TU.
    """
    P = sorted(set(map(tuple, pairs)))
    shape = PatternShape.hull(P)
    if shape.pairs() != P:
        raise LinearFitError("pairs do not form a pattern shape")
    r0, r1, r2 = fit_linear(pattern_B, P, inst.G)
    T, b = inst.T, inst.b
    nA = len(node.cols_A)
    h = list(node.h)
    rows, rhs = [], []
    for i, ei in zip(node.rows_A, node.e):
        rows.append([T[i][j] for j in node.cols_A] + [ei])
        rhs.append(b[i])
    for (lo, hi), (cf, ca) in zip(shape.bounds(), ((1, 1), (0, 1), (1, 0))):
        row = [cf * v for v in h] + [ca]
        if any(row):
            rows += [row, [-v for v in row]]
            rhs += [hi, -lo]
    if not tu_check(rows).is_tu:
        raise LinearFitError("reduced matrix is not totally unimodular")
    gamma = tuple(inst.gamma[j] + hj * r2 for j, hj in zip(node.cols_A, h)) + (r1,)
    red = GctufInstance(rows, rhs, inst.G, gamma, inst.R.shift(r0))
    return Type14Reduction(red, node, shape, inst, nA + 1)


def type2_solve(pattern_A: Pattern, pattern_B: Pattern, R: TargetSet, pairs: Iterable | None = None) -> Combination | None:
    """With an interior pair, any solution on the shape shows up in the partial patterns."""
    return combine_check(pattern_A, pattern_B, R, pairs)


def type3_shrink(shape: PatternShape | Iterable, pattern_B: Pattern) -> list[tuple[int, int]]:
    """Strictly smaller pair set that keeps every possible hidden solution (no interior pairs).

    Call only after combine_check has failed on the current pairs.
    """
    members = shape.pairs() if isinstance(shape, PatternShape) else sorted(set(map(tuple, shape)))
    hull = PatternShape.hull(members)
    cls = classify_pairs(members)
    border = cls.of_kind("border")
    if not border:
        raise SolverError("type III shrinking needs a border pair")

    def tight(p):
        v = cls.axes[p][0]
        k = _ALONG.index(v) if v in _ALONG else _ALONG.index((-v[0], -v[1]))
        lo, hi = hull.bounds()[k]
        val = _FORMS[k](p)
        return k, val, (val == hi)

    wide = [p for p in border if pattern_B.size(p) >= 2]
    if wide:
        k, val, _ = tight(wide[0])
        out = [q for q in members if _FORMS[k](q) != val]
    else:
        k, val, _ = tight(border[0])
        out = [q for q in members if _FORMS[k](q) == val]
    if len(out) >= len(members):
        raise SolverError("type III shrinking made no progress")
    return out


# ---------------------------------------------------------------- call accounting


def call_bound(n: int, d: int) -> float:
    """(d+1)^(3d) n^(d + 3 log2(d+1) + 2), with f(n, 0) = 0 and f(n <= 3, d > 0) = 1."""
    if d <= 0:
        return 0
    if n <= 3:
        return 1
    return (d + 1) ** (3 * d) * n ** (d + 3 * math.log2(d + 1) + 2)


@dataclass
class SolverReport:
    feasible: bool
    witness: tuple | None
    mode: str
    seed: int
    calls: int
    calls_by_level: dict
    bound: float
    n: int
    depth: int
    tree: str = ""
    fallbacks: list = field(default_factory=list)
    verified: bool = False

    def lines(self) -> list[str]:
        out = [
            f"verdict: {'feasible' if self.feasible else 'infeasible'}",
            f"witness: {' '.join(map(str, self.witness)) if self.witness is not None else '-'}",
            f"verified: {str(self.verified).lower()}",
            f"mode: {self.mode}",
            f"seed: {self.seed}",
            f"calls: {self.calls}",
            f"bound: {self.bound:.6g}",
        ]
        for lvl in sorted(self.calls_by_level):
            out.append(f"calls_level_{lvl}: {self.calls_by_level[lvl]}")
        for fb in self.fallbacks:
            out.append(f"fallback: {fb}")
        return out


# ---------------------------------------------------------------- the recursion


def _normalize_rows(T, b) -> tuple[list, list] | None:
    """Drop zero rows and keep the tightest copy of repeated rows; None if a zero row is violated."""
    best: dict = {}
    order = []
    for row, bi in zip(T, b):
        r = tuple(row)
        if not any(r):
            if bi < 0:
                return None
            continue
        if r not in best:
            order.append(r)
            best[r] = bi
        else:
            best[r] = min(best[r], bi)
    return [list(r) for r in order], [best[r] for r in order]


@lru_cache(maxsize=4096)
def _split_cached(Tk: tuple):
    """Leaf, 3-sum, or pivot-then-3-sum for the matrix; None when nothing fits the caps."""
    T = [list(r) for r in Tk]
    leaf = base_leaf(T)
    if leaf is not None:
        return leaf
    try:
        node = find_three_sum(T)
    except CapExceeded:
        return None
    if node is not None:
        return node
    n = len(T[0])
    tried = 0
    for i, row in enumerate(T):
        for j, v in enumerate(row):
            if not v:
                continue
            tried += 1
            if tried > PIVOT_TRIAL_CAP:
                return None
            P = pivot(T, i, j) + [[int(l == j) for l in range(n)]]
            node = find_three_sum(P)
            if node is not None:
                return PivotNode(i, j, node)
    return None


def split_node(T: Sequence[Sequence[int]]):
    return _split_cached(key(T))


class Solver:
    """One top-level solve with its caches and counters."""

    def __init__(self, mode: str = "safe", seed: int = 0, guard: float | None = None, max_depth: int = MAX_DEPTH):
        if mode not in ("safe", "window"):
            raise SolverError(f"unknown mode {mode!r}")
        self.mode = mode
        self.seed = seed
        self.guard = guard
        self.max_depth = max_depth
        self.calls = 0
        self.calls_by_level: dict = {}
        self.fallbacks: list[str] = []
        self._cache: dict = {}
        self._values: dict = {}

    # -- entry

    def run(self, inst: GctufInstance) -> SolverReport:
        if len(inst.R) == 0:
            raise SolverError("target set is empty")
        red = coset_reduce(inst)
        if red.depth > self.max_depth:
            raise DepthError(f"depth {red.depth} exceeds {self.max_depth}")
        if self.guard is None:
            self.guard = GUARD_FACTOR * call_bound(inst.n, inst.depth)
        x = self._solve(inst, 0, top=True)
        tree = ""
        node = inst.decomposition if inst.decomposition is not None else (split_node(inst.T) if inst.T and inst.n else None)
        if node is not None:
            tree = tree_to_text(node)
        return SolverReport(
            x is not None,
            x,
            self.mode,
            self.seed,
            self.calls,
            dict(self.calls_by_level),
            call_bound(inst.n, inst.depth),
            inst.n,
            inst.depth,
            tree,
            list(self.fallbacks),
            inst.is_solution(x) if x is not None else False,
        )

    # -- bookkeeping

    def _count(self, level: int) -> None:
        self.calls += 1
        self.calls_by_level[level] = self.calls_by_level.get(level, 0) + 1
        if self.guard is not None and self.calls > max(self.guard, 1):
            raise RecursionBudgetExceeded(f"{self.calls} base-block calls exceed the guard {self.guard:.6g}")

    def _fallback(self, inst: GctufInstance, why: str) -> tuple[int, ...] | None:
        log.warning("falling back to enumeration: %s", why)
        self.fallbacks.append(why)
        return self._enumerate(inst)

    def _enumerate(self, inst: GctufInstance) -> tuple[int, ...] | None:
        k = (inst.T, inst.b, inst.G.moduli, tuple(g.residues for g in inst.gamma))
        vals = self._values.get(k)
        if vals is None:
            vals = brute_gctuf(replace(inst, R=TargetSet.full(inst.G))).values
            self._values[k] = vals
        hits = [vals[r] for r in inst.R if r in vals]
        return min(hits) if hits else None

    # -- recursion

    def _solve(self, inst: GctufInstance, level: int, top: bool = False) -> tuple[int, ...] | None:
        if len(inst.R) == 0:
            return None
        ck = inst.cache_key()
        if ck in self._cache:
            return self._cache[ck]
        x = self._solve_uncached(inst, level, top)
        if x is not None and not inst.is_solution(x):
            raise SolverError("internal error: witness does not verify")
        self._cache[ck] = x
        return x

    def _solve_uncached(self, inst: GctufInstance, level: int, top: bool) -> tuple[int, ...] | None:
        if inst.depth == 0:
            return self._vertex(inst)
        red = coset_reduce(inst)
        if red is not inst:
            return self._solve(red, level)
        if inst.T and not lp_feasible(inst.T, inst.b):
            return None
        given = inst.decomposition if top else None
        if given is None:
            norm = _normalize_rows(inst.T, inst.b)
            if norm is None:
                return None
            if norm[0] != [list(r) for r in inst.T]:
                return self._solve(GctufInstance(norm[0], norm[1], inst.G, inst.gamma, inst.R), level)
        if inst.n <= 3 or not inst.T:
            return self._base(inst, level, None)
        node = given if given is not None else split_node(inst.T)
        if node is None:
            self._count(level)
            return self._fallback(inst, f"no decomposition within the caps for a {inst.k}x{inst.n} matrix")
        if isinstance(node, (NetworkLeaf, TransposedNetworkLeaf, CoreLeaf)):
            return self._base(inst, level, node)
        if isinstance(node, PivotNode):
            try:
                pt = pivot_transform(inst, node.row, node.col)
            except SolverError as exc:
                self._count(level)
                return self._fallback(inst, str(exc))
            child = node.child
            if not isinstance(child, ThreeSumNode) or len(child.rows_A) + len(child.rows_B) != pt.instance.k:
                child = split_node(pt.instance.T)
                if not isinstance(child, ThreeSumNode):
                    self._count(level)
                    return self._fallback(inst, "pivoted matrix has no 3-sum")
            return pt.to_x(self._three_sum(pt.instance, _orient(child), level))
        if isinstance(node, ThreeSumNode):
            return self._three_sum(inst, _orient(node), level)
        raise SolverError(f"unexpected decomposition node {node!r}")

    def _vertex(self, inst: GctufInstance) -> tuple[int, ...] | None:
        if not inst.T:
            return tuple([0] * inst.n)
        return integer_vertex(inst.T, inst.b)

    def _base(self, inst: GctufInstance, level: int, leaf) -> tuple[int, ...] | None:
        self._count(level)
        if leaf is None and inst.T:
            leaf = base_leaf(inst.T)
        try:
            if isinstance(leaf, NetworkLeaf):
                return solve_network_gctuf(inst, leaf.realization)
            if isinstance(leaf, TransposedNetworkLeaf):
                return solve_transposed_network_gctuf(inst, leaf.realization)
        except (CirculationError, LatticeError, StructureError) as exc:
            return self._fallback(inst, f"base solver declined: {exc}")
        # core-derived blocks and tiny blocks go to bounded enumeration
        try:
            return self._enumerate(inst)
        except OracleError as exc:
            raise SolverError(f"base block enumeration failed: {exc}") from exc

    # -- 3-sum

    def pi_bar(self, side: str, sub: GctufInstance, limit: int, level: int) -> dict:
        found: dict = {}
        G = sub.G
        while len(found) < limit:
            R_sub = TargetSet(G, frozenset(g for g in G.elements() if g not in found))
            x = self._solve(sub.with_targets(R_sub), level + 1)
            if x is None:
                break
            found[sub.group_value(x)] = x
        return found

    def _three_sum(self, inst: GctufInstance, node: ThreeSumNode, level: int) -> tuple[int, ...] | None:
        d = inst.depth
        shape, pairs = compute_pattern_shape(inst, node, self.mode)
        if not pairs:
            return None
        pat_A, pat_B = Pattern("A"), Pattern("B")
        for p in pairs:
            comb = self._fill(inst, node, p, d, pat_A, pat_B, level)
            if comb is not None:
                return stitch(inst.n, node, comb.x_A, comb.x_B)
        if self.mode == "window":
            return self._window_dispatch(inst, node, pairs, pat_A, pat_B, level)
        return self._hidden(inst, node, pairs, pat_A, pat_B, level)

    def _fill(self, inst, node, p, d, pat_A: Pattern, pat_B: Pattern, level: int) -> Combination | None:
        if p not in pat_B.values:
            sub_A, sub_B = split_three_sum(inst, node, *p)
            pat_B.values[p] = self.pi_bar("B", sub_B, d + 1, level)
            pat_A.values[p] = self.pi_bar("A", sub_A, d, level)
        return combine_check(pat_A, pat_B, inst.R, [p])

    def _hidden(self, inst, node, pairs, pat_A: Pattern, pat_B: Pattern, level: int) -> tuple[int, ...] | None:
        d = inst.depth
        hidden = [p for p in pairs if pat_B.size(p) == 1 and pat_A.size(p) == d]
        if not hidden:
            return None
        single = [p for p in pairs if pat_B.size(p) == 1]
        for group in (single, hidden) if len(hidden) > 1 else ():
            try:
                red = type14_reduce(inst, node, group, pat_B)
            except LinearFitError:
                continue
            return red.lift(self._solve(red.instance, level + 1))
        for p in hidden:
            rB, xB = next(iter(pat_B.at(p).items()))
            sub_A, _ = split_three_sum(inst, node, *p, R_A=inst.R.shift(rB))
            xA = self._solve(sub_A, level + 1)
            if xA is not None:
                return stitch(inst.n, node, xA, xB)
        return None

    def _window_dispatch(self, inst, node, pairs, pat_A: Pattern, pat_B: Pattern, level: int) -> tuple[int, ...] | None:
        d = inst.depth
        current = list(pairs)
        for _ in range(4 * (d + 1) ** 2 + 4):
            cls = classify_pairs(current, pat_B)
            if cls.structure == "II":
                comb = type2_solve(pat_A, pat_B, inst.R, current)
                return None if comb is None else stitch(inst.n, node, comb.x_A, comb.x_B)
            if cls.structure == "III":
                try:
                    current = type3_shrink(current, pat_B)
                    continue
                except SolverError:
                    # a segment is its own border line; the per-pair search is exact there
                    pass
            single = [p for p in current if pat_B.size(p) == 1]
            return self._hidden(inst, node, single, pat_A, pat_B, level)
        raise SolverError("type III shrinking did not terminate")


def compute_pattern_shape(inst: GctufInstance, node: ThreeSumNode, mode: str = "safe") -> tuple[PatternShape | None, list]:
    """Shape and the pairs to examine.

    safe: every integer pair whose two subproblems are feasible.
    window: pairs within width d of the linking values of an integral vertex,
    clipped to the feasible ones.
    """
    n = inst.n
    cf, ch = [0] * n, [0] * n
    for j, v in zip(node.cols_B, node.f):
        cf[j] = v
    for j, v in zip(node.cols_A, node.h):
        ch[j] = v
    ba = lp_bounds(inst.T, inst.b, cf)
    bb = lp_bounds(inst.T, inst.b, ch)
    if ba is None or bb is None:
        return None, []
    if None in ba or None in bb:
        raise SolverError("linking values are unbounded; bound the variables")
    a0, a1 = math.ceil(ba[0]), math.floor(ba[1])
    b0, b1 = math.ceil(bb[0]), math.floor(bb[1])
    if mode == "window":
        x0 = integer_vertex(inst.T, inst.b)
        ca, cb = linking_values(node, x0)
        d = inst.depth
        lo = d // 2
        box = PatternShape(ca + cb - lo, ca + cb - lo + d, ca - lo, ca - lo + d, cb - lo, cb - lo + d)
        cand = [p for p in box.pairs() if a0 <= p[0] <= a1 and b0 <= p[1] <= b1]
    else:
        cand = [(a, b) for a in range(a0, a1 + 1) for b in range(b0, b1 + 1)]
    pairs = []
    for a, b in cand:
        sub_A, sub_B = split_three_sum(inst, node, a, b)
        if lp_feasible(sub_B.T, sub_B.b) and lp_feasible(sub_A.T, sub_A.b):
            pairs.append((a, b))
    return (PatternShape.hull(pairs) if pairs else None), pairs


# ---------------------------------------------------------------- public entry points


def solve_with_report(inst: GctufInstance, mode: str = "safe", seed: int = 0) -> SolverReport:
    return Solver(mode, seed).run(inst)


def solve(inst: GctufInstance, mode: str = "safe", seed: int = 0) -> tuple[int, ...] | None:
    """Witness x with T x <= b and gamma^T x in R, or None when there is none."""
    return solve_with_report(inst, mode, seed).witness


def averaging_pair(points_mid: Sequence[tuple], x1: Sequence[int], x2: Sequence[int]) -> tuple | None:
    """Solutions x3, x4 at the middle pair with x1 + x2 = x3 + x4, searched among points_mid."""
    target = tuple(a + b for a, b in zip(x1, x2))
    have = set(map(tuple, points_mid))
    for x3 in sorted(have):
        x4 = tuple(t - v for t, v in zip(target, x3))
        if x4 in have:
            return x3, x4
    return None
