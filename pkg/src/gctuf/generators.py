"""Seeded instance generators.

Every matrix produced here is TU by construction (network realisations, the
core matrices, 3-sums of TU summands, pivots) and is checked before it is
returned.  The same seed always yields the same instance.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .exact_linalg import is_totally_unimodular, transpose
from .groups import AbelianGroup, TargetSet
from .instances import GctufInstance
from .tu_structure import CORES, NetworkRealization, base_leaf, compose_three_sum, network_matrix, pivot

SMALL_GROUPS = ((2,), (3,), (4,), (2, 2))


class GeneratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class Generated:
    kind: str
    seed: int
    instance: GctufInstance
    realization: NetworkRealization | None = None
    planted: tuple | None = None


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_tree(rng: random.Random, nv: int) -> list[tuple[int, int]]:
    tree = []
    for v in range(1, nv):
        u = rng.randrange(v)
        tree.append((u, v) if rng.random() < 0.5 else (v, u))
    return tree


def random_network(seed, n_vertices: int = 5, n_cols: int = 4) -> tuple[list[list[int]], NetworkRealization]:
    rng = _rng(seed)
    tree = random_tree(rng, n_vertices)
    nontree = []
    while len(nontree) < n_cols:
        v, w = rng.randrange(n_vertices), rng.randrange(n_vertices)
        if v != w:
            nontree.append((v, w))
    real = NetworkRealization(n_vertices, tuple(tree), tuple(nontree))
    return real.derive(), real


def random_transposed(seed, n_vertices: int = 5, n_rows: int = 4) -> tuple[list[list[int]], NetworkRealization]:
    N, real = random_network(seed, n_vertices, n_rows)
    return transpose(N), real


def core_derived(seed, extra_rows: int = 2) -> list[list[int]]:
    """A core matrix with some unit and repeated rows appended, rows and columns permuted and signed."""
    rng = _rng(seed)
    M = [list(r) for r in CORES[rng.choice((1, 2))]]
    for _ in range(extra_rows):
        if rng.random() < 0.5:
            j = rng.randrange(5)
            M.append([rng.choice((1, -1)) * int(c == j) for c in range(5)])
        else:
            M.append(list(rng.choice(M)))
    rng.shuffle(M)
    perm = list(range(5))
    rng.shuffle(perm)
    signs = [rng.choice((1, -1)) for _ in range(5)]
    return [[signs[c] * r[perm[c]] for c in range(5)] for r in M]


def _network_b_summand(rng: random.Random, n_inner: int) -> list[list[int]]:
    """Network matrix [[0, 1, f], [g, g, B]].

    A tree arc (v, w) to a fresh leaf w separates two parallel non-tree arcs
    (u, v) and (u, w); the remaining columns are random arcs, some touching w.
    """
    nv = rng.randint(3, max(3, n_inner + 1))
    tree = random_tree(rng, nv)
    v, w = rng.randrange(nv), nv
    u = rng.choice([x for x in range(nv) if x != v])
    cols = [tuple(rng.sample(range(nv + 1), 2)) for _ in range(n_inner)]
    return network_matrix(nv + 1, [(v, w)] + tree, [(u, v), (u, w)] + cols)


def _cographic_b_summand(rng: random.Random, n_inner: int) -> list[list[int]]:
    """Transposed network matrix [[0, 1, f], [g, g, B]].

    In the transpose the first two tree arcs (p, m), (m, q) are in series
    through a vertex m that only the first non-tree arc touches.
    """
    k = n_inner + 2
    tree = random_tree(rng, k)
    p, q = tree.pop(rng.randrange(len(tree)))
    m = k
    side = {q}
    grow = True
    while grow:
        grow = False
        for a, b in tree:
            if (a in side) != (b in side):
                side |= {a, b}
                grow = True
    x = rng.choice(sorted(side))
    rows_b = rng.randint(2, 4)
    cols = [tuple(rng.sample(range(k), 2)) for _ in range(rows_b)]
    N = network_matrix(k + 1, [(p, m), (m, q)] + tree, [(m, x)] + cols)
    return transpose(N)


def _core_b_summand(rng: random.Random) -> list[list[int]]:
    """[[0, 1, f], [g, g, B]] around a signed, permuted core B, checked for TU."""
    for _ in range(50):
        B = core_derived(rng, extra_rows=0)
        c = rng.randrange(5)
        s = rng.choice((1, -1))
        g = [s * r[c] for r in B]
        f = [0] * 5
        f[c] = rng.choice((1, -1))
        if rng.random() < 0.5:
            f[rng.randrange(5)] = rng.choice((1, -1))
        M = [[0, 1] + f] + [[gi, gi] + r for gi, r in zip(g, B)]
        if is_totally_unimodular(M):
            return M
    raise GeneratorError("no TU core summand found")


def b_summand(rng: random.Random, n_inner: int, kind: str = "network") -> list[list[int]]:
    if kind == "network":
        return _network_b_summand(rng, n_inner)
    if kind == "cographic":
        return _cographic_b_summand(rng, n_inner)
    if kind == "core":
        return _core_b_summand(rng)
    raise GeneratorError(f"unknown summand kind {kind!r}")


def a_summand(rng: random.Random, n_inner: int, kind: str = "network") -> list[list[int]]:
    """[[A, e, e], [h, 0, 1]]: a B-summand with rows and columns reversed, last two columns swapped."""
    M = [list(reversed(r)) for r in reversed(b_summand(rng, n_inner, kind))]
    for r in M:
        r[-1], r[-2] = r[-2], r[-1]
    return M


SUMMAND_KINDS = ("network", "cographic", "core")


def three_sum_matrix(seed, n_A: int = 3, n_B: int = 3, kinds: tuple[str, str] | None = None) -> list[list[int]]:
    """3-sum of two TU summands; a core summand always has five inner columns."""
    rng = _rng(seed)
    for _ in range(100):
        ka, kb = kinds if kinds is not None else (rng.choice(SUMMAND_KINDS), rng.choice(SUMMAND_KINDS))
        MA = a_summand(rng, n_A, ka)
        MB = b_summand(rng, n_B, kb)
        T = compose_three_sum(MA, MB)
        if is_totally_unimodular(T):
            return T
    raise GeneratorError("could not build a TU 3-sum")


def pivoted_matrix(seed, n_A: int = 3, n_B: int = 3) -> list[list[int]]:
    rng = _rng(seed)
    T = three_sum_matrix(rng, n_A, n_B)
    nz = [(i, j) for i, r in enumerate(T) for j, v in enumerate(r) if v]
    i, j = rng.choice(nz)
    P = pivot(T, i, j)
    if not is_totally_unimodular(P):
        raise GeneratorError("pivot lost total unimodularity")
    return P


def random_group(rng: random.Random, groups=SMALL_GROUPS) -> AbelianGroup:
    return AbelianGroup(rng.choice(groups))


def random_targets(rng: random.Random, G: AbelianGroup, max_depth: int = 3) -> TargetSet:
    els = G.elements()
    lo = max(1, G.order - max_depth)
    size = rng.randint(lo, G.order - 1) if rng.random() < 0.85 and G.order > 1 else rng.randint(lo, G.order)
    return TargetSet.of(G, rng.sample(els, size))


def boxed_instance(rng: random.Random, T, G: AbelianGroup, R: TargetSet, upper: int = 2, slack: int = 1) -> tuple[GctufInstance, tuple]:
    """T x <= T x* + s with 0 <= x <= upper; x* is planted but need not meet the group target."""
    n = len(T[0])
    xs = tuple(rng.randint(0, upper) for _ in range(n))
    loose = rng.choice((0.0, 0.2, 0.5))
    b = [sum(a * v for a, v in zip(r, xs)) + (rng.randint(0, slack) if rng.random() < loose else 0) for r in T]
    rows = [list(r) for r in T]
    rows += [[int(i == j) for j in range(n)] for i in range(n)]
    rows += [[-int(i == j) for j in range(n)] for i in range(n)]
    b += [upper] * n + [0] * n
    # labels from a proper subgroup now and then, so that some targets are out of reach
    scale = rng.choice([k for k in range(2, max(G.moduli) + 1) if max(G.moduli) % k == 0] or [1]) if rng.random() < 0.3 else 1
    gamma = tuple(G.element([scale * rng.randrange(m) for m in G.moduli]) for _ in range(n))
    inst = GctufInstance(rows, b, G, gamma, R, box=tuple((0, upper) for _ in range(n)))
    return inst, xs


def decomposable_instance(seed, max_n: int = 12, groups=SMALL_GROUPS, max_depth: int = 3) -> Generated:
    """3-sum or pivoted 3-sum with a box, a random group and a random target set."""
    rng = _rng(seed)
    for _ in range(50):
        ka, kb = rng.choice(SUMMAND_KINDS), rng.choice(SUMMAND_KINDS)
        n_A = 5 if ka == "core" else rng.randint(2, max_n - 7)
        n_B = 5 if kb == "core" else rng.randint(2, max(2, min(n_A, max_n - n_A)))
        if n_A + n_B > max_n:
            continue
        kind = "pivot" if rng.random() < 0.25 else "threesum"
        T = three_sum_matrix(rng, n_A, n_B, (ka, kb))
        if kind == "pivot":
            nz = [(i, j) for i, r in enumerate(T) for j, v in enumerate(r) if v]
            T = pivot(T, *rng.choice(nz))
        if base_leaf(T) is None or rng.random() < 0.1:
            break
    n = len(T[0])
    G = random_group(rng, groups)
    R = random_targets(rng, G, max_depth)
    upper = 1 if n > 8 else 2
    inst, xs = boxed_instance(rng, T, G, R, upper=upper)
    return Generated(kind, seed if isinstance(seed, int) else -1, inst, planted=xs)


def with_box_rows(real: NetworkRealization, n: int, transposed: bool = False) -> NetworkRealization:
    """Realisation of the matrix with rows e_j and then -e_j appended (j < n).

    For a network matrix each unit row is a new leaf arc at the head of
    non-tree arc j, which is rerouted to the leaf.  For a transposed network
    matrix the rows are columns of the realised matrix: parallel and
    antiparallel copies of tree arc j.
    """
    if transposed:
        tree = real.tree_arcs
        extra = tuple(tree[j] for j in range(n)) + tuple((h, t) for t, h in tree[:n])
        return NetworkRealization(real.n_vertices, tree, real.nontree_arcs + extra)
    nv = real.n_vertices
    tree = list(real.tree_arcs)
    nontree = list(real.nontree_arcs)
    for sign in (1, -1):
        for j in range(n):
            v, w = nontree[j]
            z = nv
            nv += 1
            tree.append((w, z) if sign > 0 else (z, w))
            nontree[j] = (v, z)
    return NetworkRealization(nv, tuple(tree), tuple(nontree))


def planted_instance(seed, kind: str = "network", n: int = 4, groups=SMALL_GROUPS, max_depth: int = 3) -> Generated:
    """Instance whose planted point meets the target: the target set always contains its value."""
    rng = _rng(seed)
    real = None
    if kind == "network":
        T, real = random_network(rng, rng.randint(3, 5), n)
    elif kind == "transposed":
        T, real = random_transposed(rng, n + 1, rng.randint(2, 5))
    elif kind == "core":
        T = core_derived(rng)
    elif kind == "threesum":
        T = three_sum_matrix(rng, n - n // 2, n // 2)
    elif kind == "pivot":
        T = pivoted_matrix(rng, n - n // 2, n // 2)
    else:
        raise GeneratorError(f"unknown kind {kind!r}")
    G = random_group(rng, groups)
    R0 = random_targets(rng, G, max_depth)
    inst, xs = boxed_instance(rng, T, G, R0)
    if real is not None:
        real = with_box_rows(real, len(T[0]), transposed=kind == "transposed")
        if real.derive() != [list(c) for c in (zip(*inst.T) if kind == "transposed" else inst.T)]:
            raise GeneratorError("extended realisation does not reproduce the matrix")
    val = inst.group_value(xs)
    if val not in R0:
        els = sorted(R0.elements, key=lambda g: g.residues)
        R = TargetSet(G, frozenset(els[1:]) | {val}) if els else TargetSet.of(G, [val])
        inst = GctufInstance(inst.T, inst.b, G, inst.gamma, R, box=inst.box)
    return Generated(kind, seed if isinstance(seed, int) else -1, inst, real, xs)


def all_sequences(G: AbelianGroup, length: int):
    return itertools.product(G.elements(), repeat=length)


# ---------------------------------------------------------------- other corpora


def delta_modular_ip(seed, n_max: int = 4, delta_max: int = 4):
    """Strictly Delta-modular IP A x <= b with A = [N; I; -I] H, so every n x n minor is 0 or +-det H.

    The unit rows make the region bounded; b is built around a planted point.
    """
    from .exact_linalg import determinant, matmul
    from .ip_reduction import IpInstance

    rng = _rng(seed)
    n = rng.randint(1, n_max)
    while True:
        H = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        dt = abs(determinant(H))
        if 1 <= dt <= delta_max and (dt > 1 or rng.random() < 0.15):
            break
    N, _ = random_network(rng, rng.randint(2, 4), n)
    T = [r for r in N if any(r)] + [[int(i == j) for j in range(n)] for i in range(n)] + [[-int(i == j) for j in range(n)] for i in range(n)]
    A = matmul(T, H)
    xs = [rng.randint(-1, 1) for _ in range(n)]
    b = [sum(a * v for a, v in zip(r, xs)) + rng.randint(0, 2) for r in A]
    c = [rng.randint(-3, 3) for _ in range(n)]
    return IpInstance(A, b, c), xs


def random_dag(seed, n_max: int = 12, density: float | None = None) -> tuple[int, tuple]:
    """Acyclic digraph on range(n): arcs only go from smaller to larger index before relabelling."""
    rng = _rng(seed)
    n = rng.randint(1, n_max)
    p = density if density is not None else rng.choice((0.05, 0.15, 0.3))
    perm = list(range(n))
    rng.shuffle(perm)
    arcs = tuple((perm[u], perm[v]) for u in range(n) for v in range(u + 1, n) if rng.random() < p)
    return n, arcs


def random_gclf(seed, n_max: int = 12, max_order: int = 6):
    from .base_lattice import GclfInstance, LatticeDag
    from .groups import groups_up_to

    rng = _rng(seed)
    n, arcs = random_dag(rng, n_max)
    G = rng.choice([g for g in groups_up_to(max_order) if g.order > 1])
    els = G.elements()
    gamma = tuple(rng.choice(els) for _ in range(n))
    return GclfInstance(LatticeDag(n, arcs), G, gamma, rng.choice(els))


def random_gcc(seed, max_vertices: int = 5, max_cap: int = 3, groups=SMALL_GROUPS):
    """Small circulation instance; lengths are non-negative so a minimum exists."""
    from .base_network import CirculationInstance

    rng = _rng(seed)
    nv = rng.randint(2, max_vertices)
    m = rng.randint(2, min(8, nv * (nv - 1)))
    arcs = []
    while len(arcs) < m:
        t, h = rng.sample(range(nv), 2)
        arcs.append((t, h))
    G = random_group(rng, groups)
    els = G.elements()
    return CirculationInstance(
        nv,
        tuple(arcs),
        tuple(rng.randint(0, max_cap) for _ in arcs),
        tuple(rng.randint(0, 3) for _ in arcs),
        tuple(rng.choice(els) for _ in arcs),
        rng.choice(els),
        G,
    )
