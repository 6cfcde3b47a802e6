"""Group-constrained lattice feasibility and transposed-network base blocks.

A lattice is given by a DAG on a ground set: X belongs to it when no arc
enters X from outside, i.e. X is closed under predecessors.  A member is
determined by its code C_X, the elements of X whose out-arcs all leave X, and
a feasible member exists with |C_X| < |G| whenever any does.  solve_gclf
enumerates codes in that range.

Transposed-network systems reduce to lattices through vertex potentials:
with x_u = pi(head u) - pi(tail u) on the tree arcs, each row of T x <= b is a
difference constraint pi(w) - pi(v) <= b_j.  Writing pi(v) as its lower bound
plus the number of levels (v, k) it reaches gives a predecessor-closed family.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .exact_linalg import integer_vertex, lp_bounds
from .groups import AbelianGroup, GroupElement
from .oracle import brute_gctuf, lattice_members
from .tu_structure import NetworkRealization

log = logging.getLogger(__name__)

GCLF_BUDGET = 2_000_000
GROUND_SET_CAP = 400


class LatticeError(ValueError):
    pass


class GclfBudgetExceeded(LatticeError):
    pass


@dataclass(frozen=True)
class LatticeDag:
    n: int
    arcs: tuple

    def __post_init__(self):
        arcs = tuple((int(u), int(v)) for u, v in self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if any(not (0 <= u < self.n and 0 <= v < self.n) for u, v in arcs):
            raise LatticeError("arc endpoint outside the ground set")
        D = nx.DiGraph()
        D.add_nodes_from(range(self.n))
        D.add_edges_from(arcs)
        if not nx.is_directed_acyclic_graph(D):
            raise LatticeError("lattice digraph has a cycle")

    def preds(self) -> list[set]:
        out = [set() for _ in range(self.n)]
        for u, v in self.arcs:
            out[v].add(u)
        return out

    def succs(self) -> list[set]:
        out = [set() for _ in range(self.n)]
        for u, v in self.arcs:
            out[u].add(v)
        return out


@dataclass(frozen=True)
class GclfInstance:
    lattice: LatticeDag
    G: AbelianGroup
    gamma: tuple
    r: GroupElement

    def value(self, X: Iterable[int]) -> GroupElement:
        v = self.G.zero
        for x in X:
            v = v + self.gamma[x]
        return v


def is_member(X: Iterable[int], dag: LatticeDag) -> bool:
    S = set(X)
    return all(u in S for u, v in dag.arcs if v in S)


def c_set(X: Iterable[int], dag: LatticeDag) -> frozenset:
    S = frozenset(X)
    if not is_member(S, dag):
        raise LatticeError("not a lattice member")
    succ = dag.succs()
    return frozenset(x for x in S if not (succ[x] & S))


def closure(C: Iterable[int], dag: LatticeDag) -> frozenset:
    """Smallest member containing C: C together with all its ancestors."""
    pred = dag.preds()
    seen = set(C)
    dq = deque(seen)
    while dq:
        v = dq.popleft()
        for u in pred[v]:
            if u not in seen:
                seen.add(u)
                dq.append(u)
    return frozenset(seen)


def _antichains(anc: list[frozenset], size: int):
    """Antichains of a given size in lexicographic order."""
    n = len(anc)
    chosen: list[int] = []

    def rec(start: int):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for v in range(start, n - (size - len(chosen)) + 1):
            if any(v in anc[c] or c in anc[v] for c in chosen):
                continue
            chosen.append(v)
            yield from rec(v + 1)
            chosen.pop()

    yield from rec(0)


def solve_gclf(inst: GclfInstance, budget: int = GCLF_BUDGET) -> frozenset | None:
    """First feasible member by code size, then lexicographic code; None certifies infeasibility."""
    dag = inst.lattice
    anc = [closure([v], dag) - {v} for v in range(dag.n)]
    seen = 0
    for size in range(min(inst.G.order, dag.n + 1)):
        for C in _antichains(anc, size):
            seen += 1
            if seen > budget:
                raise GclfBudgetExceeded(f"more than {budget} codes examined")
            X = frozenset(C).union(*(anc[c] for c in C))
            if inst.value(X) == inst.r:
                return X
    return None


# ---------------------------------------------------------------- transposed networks


@dataclass(frozen=True)
class PotentialEncoding:
    """Ground elements are (vertex, level); members correspond to integral potentials."""

    realization: NetworkRealization
    lower: tuple
    upper: tuple
    elements: tuple  # ground index -> tuple of (vertex, level) merged into it
    dag: LatticeDag

    def potentials(self, X: Iterable[int]) -> list[int]:
        pi = list(self.lower)
        for i in X:
            for v, _k in self.elements[i]:
                pi[v] += 1
        return pi

    def to_x(self, X: Iterable[int]) -> tuple[int, ...]:
        pi = self.potentials(X)
        return tuple(pi[h] - pi[t] for t, h in self.realization.tree_arcs)


def _path_vector(real: NetworkRealization, root: int, v: int) -> list[int]:
    """c with c^T x = pi(v) - pi(root)."""
    c = [0] * len(real.tree_arcs)
    for r, s in real.tree_path(root, v):
        c[r] += s
    return c


def encode_transposed(inst, realization: NetworkRealization, ground_cap: int = GROUND_SET_CAP) -> tuple[PotentialEncoding, GclfInstance] | None:
    """Lattice encoding of T x <= b where T^T is realised by `realization`.

    Returns None when the system is empty.  Raises LatticeError when a
    potential is unbounded or the ground set is too large.
    """
    if realization.derive() != [list(c) for c in zip(*inst.T)]:
        raise LatticeError("realisation does not reproduce the transposed matrix")
    nv = realization.n_vertices
    root = 0
    lower, upper = [0] * nv, [0] * nv
    for v in range(nv):
        if v == root:
            continue
        bd = lp_bounds(inst.T, inst.b, _path_vector(realization, root, v))
        if bd is None:
            return None
        lo, hi = bd
        if lo is None or hi is None:
            raise LatticeError("potential unbounded; supply bounds on the variables")
        lower[v], upper[v] = math.ceil(lo), math.floor(hi)
        if lower[v] > upper[v]:
            return None
    levels = [(v, k) for v in range(nv) for k in range(lower[v] + 1, upper[v] + 1)]
    if len(levels) > ground_cap:
        raise LatticeError(f"ground set of {len(levels)} levels exceeds the cap {ground_cap}")
    idx = {e: i for i, e in enumerate(levels)}
    D = nx.DiGraph()
    D.add_nodes_from(range(len(levels)))
    for v in range(nv):
        for k in range(lower[v] + 1, upper[v]):
            D.add_edge(idx[(v, k)], idx[(v, k + 1)])
    # row j: pi(w) - pi(v) <= b_j, realised by non-tree arc j = (v, w)
    for j, (v, w) in enumerate(realization.nontree_arcs):
        bj = inst.b[j]
        for k in range(lower[w] + 1, upper[w] + 1):
            need = k - bj  # pi(w) >= k forces pi(v) >= k - b_j
            if need <= lower[v]:
                continue
            if need > upper[v]:
                raise LatticeError("inconsistent potential bounds")
            D.add_edge(idx[(v, need)], idx[(w, k)])
    cond = nx.condensation(D)
    order = list(nx.topological_sort(cond))
    pos = {c: i for i, c in enumerate(order)}
    members = cond.graph["mapping"]
    groups: list[list] = [[] for _ in order]
    for node, c in members.items():
        groups[pos[c]].append(levels[node])
    arcs = tuple(sorted((pos[a], pos[b]) for a, b in cond.edges()))
    elements = tuple(tuple(sorted(g)) for g in groups)
    dag = LatticeDag(len(order), arcs)
    G = inst.G
    cvec = [G.zero] * nv
    for u, (t, h) in enumerate(realization.tree_arcs):
        cvec[h] = cvec[h] + inst.gamma[u]
        cvec[t] = cvec[t] - inst.gamma[u]
    gamma = []
    for grp in elements:
        g = G.zero
        for v, _k in grp:
            g = g + cvec[v]
        gamma.append(g)
    base = G.zero
    for v in range(nv):
        if lower[v]:
            base = base + lower[v] * cvec[v]
    enc = PotentialEncoding(realization, tuple(lower), tuple(upper), elements, dag)
    return enc, GclfInstance(dag, G, tuple(gamma), base)


def _lattice_route(inst, realization: NetworkRealization) -> tuple[int, ...] | None:
    built = encode_transposed(inst, realization)
    if built is None:
        return None
    enc, gclf = built
    for r in inst.R:
        X = solve_gclf(GclfInstance(gclf.lattice, gclf.G, gclf.gamma, r - gclf.r))
        if X is not None:
            return enc.to_x(X)
    return None


def solve_transposed_network_gctuf(inst, realization: NetworkRealization) -> tuple[int, ...] | None:
    """Lattice route with one GCLF per target; bounded enumeration when the route does not apply."""
    if not len(inst.R):
        return None
    if inst.G.order == 1:
        return integer_vertex(inst.T, inst.b) if inst.T else tuple([0] * inst.n)
    try:
        x = _lattice_route(inst, realization)
    except LatticeError as exc:
        log.warning("transposed-network lattice route unavailable (%s); using enumeration", exc)
        return brute_gctuf(inst).witness
    if x is not None and not inst.is_solution(x):
        raise LatticeError("internal error: lattice member does not map to a solution")
    return x


def brute_gclo(inst: GclfInstance, weights: Sequence[int]) -> frozenset | None:
    """Minimum-weight feasible member by enumeration (optimisation interface)."""
    best = None
    for X in lattice_members(inst.lattice.n, inst.lattice.arcs):
        if inst.value(X) != inst.r:
            continue
        w = sum(weights[x] for x in X)
        key = (w, sorted(X))
        if best is None or key < best[0]:
            best = (key, X)
    return None if best is None else best[1]
