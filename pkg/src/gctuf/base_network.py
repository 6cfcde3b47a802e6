"""Network base blocks through group-constrained circulations.

A network matrix N with tree arcs as rows and non-tree arcs as columns turns
N x <= b into a circulation: non-tree arc c carries x_c and tree arc r carries
-(N x)_r, which must be at least -b_r.  Shifting by an integral reference
point x0 leaves a residual graph whose circulations are the deviations.  A
feasible deviation splits conformally into unit cycles, and any |G| of them
contain a nonempty subfamily with zero group sum that can be dropped, so
deviations of at most |G| - 1 unit cycles suffice.  That caps every residual
arc at |G| - 1.

Circulations meeting a group target are found through exact-length queries:
lengths are inflated so that one integer carries both the true length and
the per-factor group tallies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import networkx as nx

from .exact_linalg import integer_vertex
from .groups import AbelianGroup, GroupElement
from .tu_structure import NetworkRealization

XLC_CAPACITY_CAP = 512
XLC_STATE_BUDGET = 2_000_000


class CirculationError(ValueError):
    pass


class XlcBudgetExceeded(CirculationError):
    pass


@dataclass(frozen=True)
class CirculationInstance:
    """Digraph with capacities, lengths and group labels per arc.

    `cycle_bound`, when set, restricts the search to circulations made of at
    most that many unit cycles; instances built from GCTUF set it to |G| - 1.
    """

    n_vertices: int
    arcs: tuple
    caps: tuple
    lengths: tuple
    labels: tuple
    target: GroupElement
    G: AbelianGroup
    cycle_bound: int | None = None

    def __post_init__(self):
        m = len(self.arcs)
        if not (len(self.caps) == len(self.lengths) == len(self.labels) == m):
            raise CirculationError("arc attribute lengths differ")
        if any(u < 0 for u in self.caps):
            raise CirculationError("negative capacity")

    def is_circulation(self, f: Sequence[int]) -> bool:
        if len(f) != len(self.arcs) or any(v < 0 or v > u for v, u in zip(f, self.caps)):
            return False
        bal = [0] * self.n_vertices
        for (t, h), v in zip(self.arcs, f):
            bal[t] -= v
            bal[h] += v
        return not any(bal)

    def group_value(self, f: Sequence[int]) -> GroupElement:
        v = self.G.zero
        for eta, x in zip(self.labels, f):
            if x:
                v = v + x * eta
        return v

    def length(self, f: Sequence[int]) -> int:
        return sum(l * x for l, x in zip(self.lengths, f))

    def is_feasible(self, f: Sequence[int]) -> bool:
        return self.is_circulation(f) and self.group_value(f) == self.target


# ---------------------------------------------------------------- cycles


@lru_cache(maxsize=2048)
def simple_cycles(n_vertices: int, arcs: tuple) -> tuple[tuple[int, ...], ...]:
    """Every simple directed cycle as a tuple of arc indices.

    Arcs are subdivided so that parallel arcs and loops come out as distinct
    cycles.
    """
    D = nx.DiGraph()
    D.add_nodes_from(("v", i) for i in range(n_vertices))
    for idx, (t, h) in enumerate(arcs):
        D.add_edge(("v", t), ("a", idx))
        D.add_edge(("a", idx), ("v", h))
    out = []
    for cyc in nx.simple_cycles(D):
        ids = [node[1] for node in cyc if node[0] == "a"]
        out.append(tuple(sorted(ids)))
    out.sort()
    return tuple(out)


class XlcTable:
    """Every value l(f) reachable by a circulation built from unit cycles.

    Breadth-first over multisets of simple cycles; capacities are tracked only
    on arcs that could saturate within the cycle bound.  The table maps each
    reachable total to a circulation attaining it with the fewest cycles.
    """

    def __init__(self, n_vertices: int, arcs: Sequence[tuple[int, int]], caps: Sequence[int], lengths: Sequence[int], cycle_bound: int | None = None, budget: int = XLC_STATE_BUDGET):
        if sum(caps) > XLC_CAPACITY_CAP and cycle_bound is None:
            raise XlcBudgetExceeded(f"total capacity {sum(caps)} exceeds the cap {XLC_CAPACITY_CAP}")
        usable = tuple(i for i, u in enumerate(caps) if u > 0)
        sub_arcs = tuple(arcs[i] for i in usable)
        cycles = [tuple(usable[j] for j in c) for c in simple_cycles(n_vertices, sub_arcs)]
        bound = sum(caps) if cycle_bound is None else cycle_bound
        tight = [a for a in range(len(arcs)) if caps[a] < bound]
        tpos = {a: i for i, a in enumerate(tight)}
        sigs: dict[tuple, tuple[int, ...]] = {}
        for c in cycles:
            use = [0] * len(tight)
            for a in c:
                if a in tpos:
                    use[tpos[a]] = 1
            key = (sum(lengths[a] for a in c), tuple(use))
            sigs.setdefault(key, c)
        self.arcs = tuple(arcs)
        self.caps = tuple(caps)
        sig_list = sorted(sigs.items())
        tcap = tuple(caps[a] for a in tight)
        start = (0, tuple([0] * len(tight)))
        parent: dict[tuple, tuple | None] = {start: None}
        frontier = [start]
        for _ in range(bound):
            nxt = []
            for st in frontier:
                total, use = st
                for si, ((ln, su), _cyc) in enumerate(sig_list):
                    nu = tuple(a + b for a, b in zip(use, su))
                    if any(a > c for a, c in zip(nu, tcap)):
                        continue
                    ns = (total + ln, nu)
                    if ns not in parent:
                        parent[ns] = (st, si)
                        nxt.append(ns)
                        if len(parent) > budget:
                            raise XlcBudgetExceeded("exact-length search state budget exhausted")
            if not nxt:
                break
            frontier = nxt
        self._parent = parent
        self._sigs = sig_list
        self.values: dict[int, tuple] = {}
        for st in parent:
            self.values.setdefault(st[0], st)

    def circulation(self, value: int) -> tuple[int, ...] | None:
        st = self.values.get(value)
        if st is None:
            return None
        f = [0] * len(self.arcs)
        while self._parent[st] is not None:
            prev, si = self._parent[st]
            for a in self._sigs[si][1]:
                f[a] += 1
            st = prev
        return tuple(f)


@lru_cache(maxsize=512)
def _xlc_table(n_vertices: int, arcs: tuple, caps: tuple, lengths: tuple, cycle_bound: int | None) -> XlcTable:
    return XlcTable(n_vertices, arcs, caps, lengths, cycle_bound)


def solve_xlc(n_vertices: int, arcs: Sequence[tuple[int, int]], caps: Sequence[int], lengths: Sequence[int], L: int, cycle_bound: int | None = None) -> tuple[int, ...] | None:
    """A circulation 0 <= f <= u with l(f) = L, or None."""
    table = _xlc_table(n_vertices, tuple(map(tuple, arcs)), tuple(caps), tuple(lengths), cycle_bound)
    return table.circulation(L)


# ---------------------------------------------------------------- length encoding


@dataclass(frozen=True)
class LengthEncoding:
    """l~(a) = l(a) B^k + sum_i B^(i-1) phi_i(eta(a)) with B = m^2 |A|."""

    m: int
    n_arcs: int
    moduli: tuple

    @property
    def k(self) -> int:
        return len(self.moduli)

    @property
    def base(self) -> int:
        return self.m * self.m * self.n_arcs

    def encode_arc(self, length: int, eta: GroupElement) -> int:
        B = self.base
        return length * B**self.k + sum(B**i * eta.residues[i] for i in range(self.k))

    def encode_target(self, L: int, d: Sequence[int], r: GroupElement) -> int:
        B = self.base
        return L * B**self.k + sum(B**i * (d[i] * self.moduli[i] + r.residues[i]) for i in range(self.k))

    def decode(self, value: int) -> tuple[int, tuple[int, ...]]:
        """(true length, per-factor tallies) of an encoded total."""
        B = self.base
        L, rest = divmod(value, B**self.k)
        tallies = []
        for _ in range(self.k):
            rest, t = divmod(rest, B)
            tallies.append(t)
        # divmod peels the lowest digit first, which is factor 1
        return L, tuple(tallies)

    def digit_ranges(self, max_cap: int | None = None) -> list[range]:
        """d_i in {0, ..., m|A| - 1}, widened when capacities exceed m - 1."""
        out = []
        for mi in self.moduli:
            top = self.m * self.n_arcs
            if max_cap is not None:
                top = max(top, (mi - 1) * max_cap * self.n_arcs // mi + 1)
            out.append(range(top))
        return out

    def check_separation(self, max_cap: int) -> None:
        worst = max((mi - 1 for mi in self.moduli), default=0) * max_cap * self.n_arcs
        if worst >= self.base:
            raise CirculationError("group tallies may overflow a digit of the length encoding")


def gcc_to_xlc_lengths(gcc: CirculationInstance) -> tuple[LengthEncoding, tuple[int, ...]]:
    enc = LengthEncoding(max(gcc.G.order, 1), max(len(gcc.arcs), 1), gcc.G.moduli)
    return enc, tuple(enc.encode_arc(l, eta) for l, eta in zip(gcc.lengths, gcc.labels))


def xlc_targets(enc: LengthEncoding, L: int, r: GroupElement, max_cap: int | None = None):
    for d in itertools.product(*enc.digit_ranges(max_cap)):
        yield enc.encode_target(L, d, r)


def solve_gcc(gcc: CirculationInstance) -> tuple[int, ...] | None:
    """Minimum-length circulation with group value equal to the target.

    Lengths are scanned upward over the values the exact-length table can
    reach; for each length every digit tuple is probed.
    """
    enc, lt = gcc_to_xlc_lengths(gcc)
    umax = max(gcc.caps, default=0)
    enc.check_separation(umax)
    table = _xlc_table(gcc.n_vertices, tuple(gcc.arcs), tuple(gcc.caps), lt, gcc.cycle_bound)
    lengths = sorted({enc.decode(v)[0] for v in table.values})
    for L in lengths:
        for target in xlc_targets(enc, L, gcc.target, umax):
            f = table.circulation(target)
            if f is not None:
                if not gcc.is_feasible(f):
                    raise CirculationError("internal error: decoded circulation misses the target")
                return f
    return None


# ---------------------------------------------------------------- GCTUF -> GCC


@dataclass(frozen=True)
class GccMapping:
    """Residual arc roles: (kind, index, sign) with kind 'tree' or 'nontree'."""

    x0: tuple
    roles: tuple

    def to_x(self, f: Sequence[int]) -> tuple[int, ...]:
        x = list(self.x0)
        for (kind, idx, sgn), v in zip(self.roles, f):
            if kind == "nontree" and v:
                x[idx] += sgn * v
        return tuple(x)


def residual_network(inst, realization: NetworkRealization, x0: Sequence[int]) -> tuple[list, list, list, GccMapping]:
    if realization.derive() != [list(r) for r in inst.T]:
        raise CirculationError("realisation does not reproduce the constraint matrix")
    m = inst.G.order
    cap = m - 1
    arcs, caps, labels, roles = [], [], [], []
    for c, (v, w) in enumerate(realization.nontree_arcs):
        arcs += [(v, w), (w, v)]
        caps += [cap, cap]
        labels += [inst.gamma[c], -inst.gamma[c]]
        roles += [("nontree", c, 1), ("nontree", c, -1)]
    for r, (t, h) in enumerate(realization.tree_arcs):
        slack = inst.b[r] - sum(a * v for a, v in zip(inst.T[r], x0))
        arcs += [(t, h), (h, t)]
        caps += [cap, min(slack, cap)]
        labels += [inst.G.zero, inst.G.zero]
        roles += [("tree", r, 1), ("tree", r, -1)]
    return arcs, caps, labels, GccMapping(tuple(x0), tuple(roles))


def gctuf_network_to_gcc(inst, realization: NetworkRealization, r: GroupElement | None = None, x0: Sequence[int] | None = None) -> tuple[CirculationInstance, GccMapping] | None:
    """GCC instance for target r, or None when T x <= b has no integral point."""
    if r is None:
        if len(inst.R) != 1:
            raise CirculationError("several targets; pass one explicitly")
        r = next(iter(inst.R))
    if x0 is None:
        x0 = integer_vertex(inst.T, inst.b) if inst.T else tuple([0] * inst.n)
        if x0 is None:
            return None
    arcs, caps, labels, mapping = residual_network(inst, realization, x0)
    shift = inst.group_value(x0)
    gcc = CirculationInstance(
        realization.n_vertices,
        tuple(arcs),
        tuple(caps),
        tuple([0] * len(arcs)),
        tuple(labels),
        r - shift,
        inst.G,
        cycle_bound=max(inst.G.order - 1, 0),
    )
    return gcc, mapping


def solve_network_gctuf(inst, realization: NetworkRealization) -> tuple[int, ...] | None:
    """Solution of a GCTUF instance whose matrix is the given network matrix."""
    if not inst.T:
        x0 = tuple([0] * inst.n)
    else:
        x0 = integer_vertex(inst.T, inst.b)
        if x0 is None:
            return None
    for r in inst.R:
        built = gctuf_network_to_gcc(inst, realization, r, x0)
        gcc, mapping = built
        f = solve_gcc(gcc)
        if f is not None:
            x = mapping.to_x(f)
            if not inst.is_solution(x):
                raise CirculationError("internal error: mapped circulation is not a solution")
            return x
    return None
