"""Structure of TU matrices at desk scale.

Network realisation, the two 5x5 core matrices, pivoting, 3-sum search and a
decomposition tree that can be recomposed to the input.  The searches are
exhaustive under explicit caps rather than polynomial.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exact_linalg import Matrix, as_matrix, key, ncols, tu_check, transpose

NETWORK_ROW_CAP = 10
NETWORK_NODE_BUDGET = 200_000
THREE_SUM_COL_CAP = 14
PIVOT_TRIAL_CAP = 64

CORE1 = (
    (1, -1, 0, 0, -1),
    (-1, 1, -1, 0, 0),
    (0, -1, 1, -1, 0),
    (0, 0, -1, 1, -1),
    (-1, 0, 0, -1, 1),
)
CORE2 = (
    (1, 1, 1, 1, 1),
    (1, 1, 1, 0, 0),
    (1, 0, 1, 1, 0),
    (1, 0, 0, 1, 1),
    (1, 1, 0, 0, 1),
)
CORES = {1: CORE1, 2: CORE2}


class StructureError(ValueError):
    pass


class CapExceeded(StructureError):
    pass


class UndecomposableError(StructureError):
    pass


def pivot(T: Sequence[Sequence[int]], i: int, j: int) -> Matrix:
    """Pivot on the +-1 entry T[i][j]."""
    eps = T[i][j]
    if eps not in (-1, 1):
        raise StructureError(f"pivot entry T[{i}][{j}] = {eps} is not +-1")
    out = []
    for r, row in enumerate(T):
        if r == i:
            out.append([-eps if c == j else eps * v for c, v in enumerate(row)])
        else:
            q = row[j]
            out.append([eps * q if c == j else v - eps * q * T[i][c] for c, v in enumerate(row)])
    return out


# ---------------------------------------------------------------- networks


@dataclass(frozen=True)
class NetworkRealization:
    """Rows are tree arcs, columns are non-tree arcs, both as (tail, head)."""

    n_vertices: int
    tree_arcs: tuple
    nontree_arcs: tuple

    def tree_path(self, v: int, w: int) -> list[tuple[int, int]]:
        """(row, +1/-1) for every tree arc on the v-w path."""
        adj: dict[int, list] = {x: [] for x in range(self.n_vertices)}
        for r, (t, h) in enumerate(self.tree_arcs):
            adj[t].append((h, r, 1))
            adj[h].append((t, r, -1))
        prev: dict[int, tuple] = {v: None}
        dq = deque([v])
        while dq:
            x = dq.popleft()
            if x == w:
                break
            for y, r, s in adj[x]:
                if y not in prev:
                    prev[y] = (x, r, s)
                    dq.append(y)
        if w not in prev:
            raise StructureError("tree is not spanning")
        path = []
        x = w
        while prev[x] is not None:
            px, r, s = prev[x]
            path.append((r, s))
            x = px
        return path[::-1]

    def derive(self) -> Matrix:
        k = len(self.tree_arcs)
        n = len(self.nontree_arcs)
        M = [[0] * n for _ in range(k)]
        for c, (v, w) in enumerate(self.nontree_arcs):
            for r, s in self.tree_path(v, w):
                M[r][c] = s
        return M

    def to_json(self) -> dict:
        return {"vertices": self.n_vertices, "tree": [list(a) for a in self.tree_arcs], "nontree": [list(a) for a in self.nontree_arcs]}

    @classmethod
    def from_json(cls, d: dict) -> NetworkRealization:
        return cls(int(d["vertices"]), tuple(tuple(a) for a in d["tree"]), tuple(tuple(a) for a in d["nontree"]))


def network_matrix(n_vertices: int, tree_arcs, nontree_arcs) -> Matrix:
    return NetworkRealization(n_vertices, tuple(map(tuple, tree_arcs)), tuple(map(tuple, nontree_arcs))).derive()


def _strip(M: Matrix) -> tuple[list[int], list[int], list[tuple]]:
    """Remove zero, unit and (negated) duplicate rows and columns to a fixpoint."""
    k, n = len(M), ncols(M)
    rows = list(range(k))
    cols = list(range(n))
    ops: list[tuple] = []
    changed = True
    while changed:
        changed = False
        for r in list(rows):
            nz = [c for c in cols if M[r][c]]
            if len(nz) <= 1:
                ops.append(("row", r, nz[0] if nz else None, M[r][nz[0]] if nz else 0))
                rows.remove(r)
                changed = True
        for c in list(cols):
            nz = [r for r in rows if M[r][c]]
            if len(nz) <= 1:
                ops.append(("col", c, nz[0] if nz else None, M[nz[0]][c] if nz else 0))
                cols.remove(c)
                changed = True
        seen: dict[tuple, int] = {}
        for r in list(rows):
            vec = tuple(M[r][c] for c in cols)
            neg = tuple(-v for v in vec)
            if vec in seen or neg in seen:
                s = 1 if vec in seen else -1
                ops.append(("duprow", r, seen[vec] if s == 1 else seen[neg], s))
                rows.remove(r)
                changed = True
            else:
                seen[vec] = r
        seen = {}
        for c in list(cols):
            vec = tuple(M[r][c] for r in rows)
            neg = tuple(-v for v in vec)
            if vec in seen or neg in seen:
                s = 1 if vec in seen else -1
                ops.append(("dupcol", c, seen[vec] if s == 1 else seen[neg], s))
                cols.remove(c)
                changed = True
            else:
                seen[vec] = c
    return rows, cols, ops


@lru_cache(maxsize=16)
def _ternary_vectors(k: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1, -1), repeat=k))[1:], dtype=np.int64).reshape(-1, k)


def _star_candidates(N: np.ndarray) -> np.ndarray:
    """Every q in {0,+-1}^k, q != 0, with q N in {0,+-1}^n, as rows [q, qN]."""
    Q = _ternary_vectors(N.shape[0])
    P = Q @ N
    ok = (np.abs(P) <= 1).all(axis=1)
    Q, P = Q[ok], P[ok]
    # a cycle meets a vertex star in zero or two arcs
    C = _circuit_supports(N)
    hits = (np.hstack([Q, P]) != 0).astype(np.int64) @ C.T
    ok = ((hits == 0) | (hits == 2)).all(axis=1)
    return np.hstack([Q[ok], P[ok]])


def _circuit_supports(N: np.ndarray) -> np.ndarray:
    """Supports of the fundamental circuits of [I N] and of the circuits
    formed by two non-tree elements, as 0/1 rows."""
    k, n = N.shape
    out = []
    for c in range(n):
        z = np.zeros(k + n, dtype=np.int64)
        z[:k] = N[:, c] != 0
        z[k + c] = 1
        out.append(z)
    full = np.hstack([np.eye(k, dtype=np.int64), N])
    for c1, c2 in itertools.combinations(range(n), 2):
        for sgn in (1, -1):
            x = N[:, c1] + sgn * N[:, c2]
            if np.abs(x).max(initial=0) > 1:
                continue
            z = np.zeros(k + n, dtype=np.int64)
            z[:k] = x != 0
            z[k + c1] = z[k + c2] = 1
            supp = np.nonzero(z)[0]
            if np.linalg.matrix_rank(full[:, supp].astype(float)) == len(supp) - 1:
                out.append(z)
    return np.array(out, dtype=np.int64).reshape(-1, k + n)


def _search_tree(M: Matrix, rows: list[int], cols: list[int], budget: int) -> dict | None:
    """Realise the reduced matrix through vertex stars.

    Restricted to the tree arcs, the star of a vertex is a vector q in
    {0,+-1}^k, and on the non-tree arcs it equals q N.  A realisation is an
    exact cover of the slots (arc, +1) and (arc, -1) by k+1 such vectors whose
    tree arcs form a spanning tree.  The search is Algorithm X with the
    smallest-slot rule, pruned as soon as the tree arcs close a cycle.
    """
    k = len(rows)
    if k == 0:
        return {"arcs": {}, "nv": 1}
    N = np.array([[M[r][c] for c in cols] for r in rows], dtype=np.int64).reshape(k, len(cols))
    cands = _star_candidates(N)
    m = cands.shape[1]
    needed = [a for a in range(m) if cands[:, a].any()]
    covers: dict[tuple, set] = {}
    for a in needed:
        for sgn in (1, -1):
            covers[(a, sgn)] = set(np.nonzero(cands[:, a] == sgn)[0].tolist())
    if any(not v for v in covers.values()):
        return None
    rows_of = [[(a, int(row[a])) for a in needed if row[a]] for row in cands]
    tree_of = [[(a, v) for a, v in sl if a < k] for sl in rows_of]
    chosen: list[int] = []
    ends: dict[tuple, int] = {}
    nodes = [0]

    def acyclic() -> bool:
        parent = list(range(len(chosen)))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for a in range(k):
            t, h = ends.get((a, 1)), ends.get((a, -1))
            if t is None or h is None:
                continue
            x, y = find(t), find(h)
            if x == y:
                return False
            parent[x] = y
        return True

    def select(i):
        removed = []
        for x in rows_of[i]:
            for j in covers[x]:
                for y in rows_of[j]:
                    if y != x and y in covers:
                        covers[y].discard(j)
            removed.append((x, covers.pop(x)))
        return removed

    def deselect(removed):
        for x, rs in reversed(removed):
            covers[x] = rs
            for j in rs:
                for y in rows_of[j]:
                    if y != x and y in covers:
                        covers[y].add(j)

    def rec() -> bool:
        nodes[0] += 1
        if nodes[0] > budget:
            raise CapExceeded("network recognition node budget exhausted")
        if not covers:
            return len(chosen) == k + 1
        if len(chosen) >= k + 1:
            return False
        x = min(covers, key=lambda c: len(covers[c]))
        for i in sorted(covers[x]):
            pos = len(chosen)
            chosen.append(i)
            for sl in tree_of[i]:
                ends[sl] = pos
            if acyclic():
                removed = select(i)
                if rec():
                    return True
                deselect(removed)
            for sl in tree_of[i]:
                del ends[sl]
            chosen.pop()
        return False

    if not rec():
        return None
    arcs = {r: (ends[(idx, 1)], ends[(idx, -1)]) for idx, r in enumerate(rows)}
    return {"arcs": arcs, "nv": k + 1}


def recognize_network(T: Sequence[Sequence[int]], cap: int = NETWORK_ROW_CAP, budget: int = NETWORK_NODE_BUDGET) -> NetworkRealization | None:
    M = as_matrix(T)
    if any(v not in (-1, 0, 1) for r in M for v in r):
        return None
    return _recognize_cached(key(M), cap, budget)


@lru_cache(maxsize=4096)
def _recognize_cached(Mk: tuple, cap: int, budget: int) -> NetworkRealization | None:
    M = [list(r) for r in Mk]
    k = len(M)
    n = ncols(M)
    rows, cols, ops = _strip(M)
    if len(rows) > cap:
        raise CapExceeded(f"{len(rows)} irreducible rows exceed the network search cap {cap}")
    found = _search_tree(M, rows, cols, budget)
    if found is None:
        return None
    arcs = found["arcs"]
    nv = found["nv"]
    # glue components at one vertex each
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for t, h in arcs.values():
        a, b = find(t), find(h)
        if a != b:
            parent[a] = b
    comp_rep: dict[int, int] = {}
    for v in range(nv):
        comp_rep.setdefault(find(v), v)
    hub = comp_rep[find(0)]
    relabel = {}
    for root, rep in comp_rep.items():
        relabel[rep] = hub
    next_label = 0
    final: dict[int, int] = {}
    for v in range(nv):
        tgt = relabel.get(v, v)
        if tgt not in final:
            final[tgt] = next_label
            next_label += 1
        final[v] = final[tgt]
    tree = {r: (final[t], final[h]) for r, (t, h) in arcs.items()}
    nverts = next_label
    nontree: dict[int, tuple[int, int]] = {}
    for c in cols:
        sup = [(r, M[r][c]) for r in rows if M[r][c]]
        outs, ins = set(), set()
        for r, s in sup:
            t, h = tree[r]
            a, b = (t, h) if s == 1 else (h, t)
            outs.add(a)
            ins.add(b)
        start = (outs - ins).pop()
        end = (ins - outs).pop()
        nontree[c] = (start, end)
    # undo the stripping, most recent first
    for op in reversed(ops):
        kind, idx, other, s = op
        if kind == "row":
            if other is None:
                tree[idx] = (0, nverts)
            else:
                v, w = nontree[other]
                tree[idx] = (w, nverts) if s == 1 else (nverts, w)
                nontree[other] = (v, nverts)
            nverts += 1
        elif kind == "col":
            if other is None:
                nontree[idx] = (0, 0)
            else:
                t, h = tree[other]
                nontree[idx] = (t, h) if s == 1 else (h, t)
        elif kind == "duprow":
            t, h = tree[other]
            m = nverts
            nverts += 1
            tree[other] = (t, m)
            tree[idx] = (m, h) if s == 1 else (h, m)
        elif kind == "dupcol":
            v, w = nontree[other]
            nontree[idx] = (v, w) if s == 1 else (w, v)
    if k == 0:
        nverts = max(nverts, 1)
    real = NetworkRealization(nverts, tuple(tree[r] for r in range(k)), tuple(nontree[c] for c in range(n)))
    if real.derive() != M:
        raise StructureError("internal error: realisation does not reproduce the matrix")
    return real


# ---------------------------------------------------------------- cores


def _match_core(M: Matrix, core: tuple) -> dict | None:
    """Row/column permutations and signs with M = diag(rs) core[perm] diag(cs)."""
    pat = [[abs(v) for v in r] for r in M]
    cpat = [[abs(v) for v in r] for r in core]
    for rp in itertools.permutations(range(5)):
        rows = [cpat[rp[i]] for i in range(5)]
        # column permutation: column j of M must equal column cp[j] of the row-permuted core
        colsig = {}
        for j in range(5):
            colsig.setdefault(tuple(rows[i][j] for i in range(5)), []).append(j)
        cand = []
        for j in range(5):
            sig = tuple(pat[i][j] for i in range(5))
            if sig not in colsig:
                break
            cand.append(colsig[sig])
        else:
            for cp in itertools.product(*cand):
                if len(set(cp)) < 5:
                    continue
                # signs: M[i][j] = rs[i] * core[rp[i]][cp[j]] * cs[j]
                rs = [0] * 5
                cs = [0] * 5
                rs[0] = 1
                ok = True
                stack = [("r", 0)]
                while stack and ok:
                    kind, a = stack.pop()
                    for b in range(5):
                        i, j = (a, b) if kind == "r" else (b, a)
                        c = core[rp[i]][cp[j]]
                        if c == 0:
                            continue
                        if kind == "r":
                            want = M[i][j] * c * rs[i]
                            if cs[j] == 0:
                                cs[j] = want
                                stack.append(("c", j))
                            elif cs[j] != want:
                                ok = False
                                break
                        else:
                            want = M[i][j] * c * cs[j]
                            if rs[i] == 0:
                                rs[i] = want
                                stack.append(("r", i))
                            elif rs[i] != want:
                                ok = False
                                break
                if ok and all(rs) and all(cs):
                    if all(M[i][j] == rs[i] * core[rp[i]][cp[j]] * cs[j] for i in range(5) for j in range(5)):
                        return {"rows": list(rp), "cols": list(cp), "row_signs": rs, "col_signs": cs}
    return None


def recognize_core(T: Sequence[Sequence[int]]) -> tuple[int, list] | None:
    """Reduce with unit deletions, then duplicate deletions, then sign normalisation.

    The trace lists every deletion applied to the input together with the
    deleted vector, and ends with the permutation and signs that map the core
    onto the reduced matrix unless those are trivial.
    """
    M = as_matrix(T)
    trace: list = []
    changed = True
    while changed:
        changed = False
        while True:
            hit = None
            for i, r in enumerate(M):
                if sum(1 for v in r if v) <= 1:
                    hit = ("del_row", i, list(r))
                    break
            if hit is None:
                for j in range(ncols(M)):
                    col = [r[j] for r in M]
                    if sum(1 for v in col if v) <= 1:
                        hit = ("del_col", j, col)
                        break
            if hit is None:
                break
            _apply_core_op(M, hit)
            trace.append(hit)
            changed = True
            if not M or not ncols(M):
                return None
        hit = None
        for i in range(len(M)):
            for i2 in range(i):
                if M[i] == M[i2] or M[i] == [-v for v in M[i2]]:
                    hit = ("del_row", i, list(M[i]))
                    break
            if hit:
                break
        if hit is None:
            Mt = transpose(M)
            for j in range(len(Mt)):
                for j2 in range(j):
                    if Mt[j] == Mt[j2] or Mt[j] == [-v for v in Mt[j2]]:
                        hit = ("del_col", j, list(Mt[j]))
                        break
                if hit:
                    break
        if hit is not None:
            _apply_core_op(M, hit)
            trace.append(hit)
            changed = True
    if len(M) != 5 or ncols(M) != 5:
        return None
    # sign normalisation is folded into the match: row and column signs
    for cid, core in CORES.items():
        m = _match_core(M, core)
        if m is not None:
            identity = m["rows"] == list(range(5)) and m["cols"] == list(range(5)) and all(v == 1 for v in m["row_signs"] + m["col_signs"])
            if not identity:
                trace.append(("match", m))
            return cid, trace
    return None


def _apply_core_op(M: Matrix, op: tuple) -> None:
    kind = op[0]
    if kind == "del_row":
        M.pop(op[1])
    elif kind == "del_col":
        for r in M:
            r.pop(op[1])
    elif kind == "neg_row":
        M[op[1]] = [-v for v in M[op[1]]]
    elif kind == "neg_col":
        for r in M:
            r[op[1]] = -r[op[1]]


def replay_core(core_id: int, trace: list) -> Matrix:
    """Rebuild the original matrix from a core and its reduction trace."""
    core = CORES[core_id]
    M: Matrix = [[0] * 5 for _ in range(5)]
    steps = list(trace)
    if steps and steps[-1][0] == "match":
        m = steps.pop()[1]
        for i in range(5):
            for j in range(5):
                M[i][j] = m["row_signs"][i] * core[m["rows"][i]][m["cols"][j]] * m["col_signs"][j]
    else:
        M = [list(r) for r in core]
    for op in reversed(steps):
        kind = op[0]
        if kind == "del_row":
            M.insert(op[1], list(op[2]))
        elif kind == "del_col":
            for r, v in zip(M, op[2]):
                r.insert(op[1], v)
            if not M:
                pass
        elif kind in ("neg_row", "neg_col"):
            _apply_core_op(M, op)
    return M


# ---------------------------------------------------------------- 3-sums


@dataclass
class NetworkLeaf:
    realization: NetworkRealization


@dataclass
class TransposedNetworkLeaf:
    realization: NetworkRealization  # realises the transpose


@dataclass
class CoreLeaf:
    core_id: int
    trace: list


@dataclass
class PivotNode:
    row: int
    col: int
    child: object


@dataclass
class ThreeSumNode:
    """T[rows_A][cols_A] = A, T[rows_A][cols_B] = e f^T, T[rows_B][cols_A] = g h^T, T[rows_B][cols_B] = B."""

    rows_A: list
    cols_A: list
    rows_B: list
    cols_B: list
    e: list
    f: list
    g: list
    h: list
    shape: tuple = (0, 0)
    children: list = field(default_factory=list)

    def blocks(self, T) -> tuple[Matrix, Matrix]:
        A = [[T[i][j] for j in self.cols_A] for i in self.rows_A]
        B = [[T[i][j] for j in self.cols_B] for i in self.rows_B]
        return A, B

    def parts(self, T) -> tuple[Matrix, Matrix]:
        """The two summands [[A, e, e], [h^T, 0, 1]] and [[0, 1, f^T], [g, g, B]]."""
        A, B = self.blocks(T)
        MA = [row + [ei, ei] for row, ei in zip(A, self.e)] + [list(self.h) + [0, 1]]
        MB = [[0, 1] + list(self.f)] + [[gi, gi] + row for row, gi in zip(B, self.g)]
        return MA, MB


def compose_three_sum(MA: Sequence[Sequence[int]], MB: Sequence[Sequence[int]]) -> Matrix:
    """[[A, e, e], [h, 0, 1]] (+) [[0, 1, f], [g, g, B]] = [[A, e f^T], [g h^T, B]]."""
    A = [list(r[:-2]) for r in MA[:-1]]
    e = [r[-1] for r in MA[:-1]]
    h = list(MA[-1][:-2])
    f = list(MB[0][2:])
    g = [r[0] for r in MB[1:]]
    B = [list(r[2:]) for r in MB[1:]]
    top = [ra + [ei * fj for fj in f] for ra, ei in zip(A, e)]
    bottom = [[gi * hj for hj in h] + rb for rb, gi in zip(B, g)]
    return top + bottom


def _normalize(vec: tuple) -> tuple:
    first = next((v for v in vec if v), 0)
    return tuple(v * first for v in vec) if first else vec


def _assign_rows(T: Matrix, cols_A: list, cols_B: list) -> ThreeSumNode | None:
    k = len(T)
    parts = [(tuple(T[i][j] for j in cols_A), tuple(T[i][j] for j in cols_B)) for i in range(k)]
    mixed = [i for i in range(k) if any(parts[i][0]) and any(parts[i][1])]

    def attempt(first_to_A: bool):
        side = {}
        f = h = None
        for i in range(k):
            a, b = parts[i]
            if not any(b):
                side[i] = "A"
            elif not any(a):
                side[i] = "B"
        for n_i, i in enumerate(mixed):
            a, b = parts[i]
            na, nb = _normalize(a), _normalize(b)
            if n_i == 0:
                if first_to_A:
                    f = nb
                    side[i] = "A"
                else:
                    h = na
                    side[i] = "B"
                continue
            if f is not None and nb == f:
                side[i] = "A"
            elif h is not None and na == h:
                side[i] = "B"
            elif f is None:
                f = nb
                side[i] = "A"
            elif h is None:
                h = na
                side[i] = "B"
            else:
                return None
        rows_A = [i for i in range(k) if side[i] == "A"]
        rows_B = [i for i in range(k) if side[i] == "B"]
        # rank-one checks; unit entries are +-1 so a row is +-f
        fv = list(f) if f is not None else [0] * len(cols_B)
        hv = list(h) if h is not None else [0] * len(cols_A)
        e = []
        for i in rows_A:
            b = parts[i][1]
            if not any(b):
                e.append(0)
            elif b == tuple(fv):
                e.append(1)
            elif b == tuple(-v for v in fv):
                e.append(-1)
            else:
                return None
        g = []
        for i in rows_B:
            a = parts[i][0]
            if not any(a):
                g.append(0)
            elif a == tuple(hv):
                g.append(1)
            elif a == tuple(-v for v in hv):
                g.append(-1)
            else:
                return None
        if not any(e):
            fv = [0] * len(cols_B)
        if not any(g):
            hv = [0] * len(cols_A)
        return ThreeSumNode(rows_A, list(cols_A), rows_B, list(cols_B), e, fv, g, hv, shape=(k, len(T[0])))

    if not mixed:
        return attempt(True)
    return attempt(True) or attempt(False)


def find_three_sum(T: Sequence[Sequence[int]], cap: int = THREE_SUM_COL_CAP, require_tu_parts: bool = False, min_side: int = 2) -> ThreeSumNode | None:
    """A row/column bipartition with rank <= 1 off-diagonal blocks.

    Column splits are tried most balanced first, then lexicographically; the
    B side is always the one with fewer columns.
    """
    M = as_matrix(T)
    n = ncols(M)
    if n > cap:
        raise CapExceeded(f"{n} columns exceed the 3-sum search cap {cap}")
    for nB in range(n // 2, min_side - 1, -1):
        nA = n - nB
        if nA < min_side:
            continue
        for cols_B in itertools.combinations(range(n), nB):
            cols_A = [j for j in range(n) if j not in cols_B]
            node = _assign_rows(M, cols_A, list(cols_B))
            if node is None:
                continue
            if require_tu_parts:
                MA, MB = node.parts(M)
                if not (tu_check(MA, cap=10).is_tu and tu_check(MB, cap=10).is_tu):
                    continue
            return node
    return None


def recompose(node) -> Matrix:
    if isinstance(node, NetworkLeaf):
        return node.realization.derive()
    if isinstance(node, TransposedNetworkLeaf):
        return transpose(node.realization.derive())
    if isinstance(node, CoreLeaf):
        return replay_core(node.core_id, node.trace)
    if isinstance(node, PivotNode):
        P = recompose(node.child)
        # pivoting twice negates the pivot row and column off the pivot entry
        Q = pivot(P, node.row, node.col)
        for c in range(len(Q[0])):
            if c != node.col:
                Q[node.row][c] = -Q[node.row][c]
        for r in range(len(Q)):
            if r != node.row:
                Q[r][node.col] = -Q[r][node.col]
        return Q
    if isinstance(node, ThreeSumNode):
        MA = recompose(node.children[0])
        MB = recompose(node.children[1])
        S = compose_three_sum(MA, MB)
        k, n = node.shape
        T = [[0] * n for _ in range(k)]
        ka = len(node.rows_A)
        na = len(node.cols_A)
        for ii, i in enumerate(node.rows_A + node.rows_B):
            for jj, j in enumerate(node.cols_A + node.cols_B):
                T[i][j] = S[ii][jj]
        return T
    raise StructureError(f"unknown node {node!r}")


def base_leaf(T: Sequence[Sequence[int]], cap: int = NETWORK_ROW_CAP):
    """Network, transposed-network or core leaf for T, or None."""
    M = as_matrix(T)
    try:
        real = recognize_network(M, cap)
        if real is not None:
            return NetworkLeaf(real)
    except CapExceeded:
        pass
    try:
        real = recognize_network(transpose(M), cap)
        if real is not None:
            return TransposedNetworkLeaf(real)
    except CapExceeded:
        pass
    core = recognize_core(M)
    if core is not None:
        return CoreLeaf(*core)
    return None


def decompose(T: Sequence[Sequence[int]], depth: int = 0, max_depth: int = 12):
    """Decomposition tree with network, transposed-network and core leaves."""
    M = as_matrix(T)
    leaf = base_leaf(M)
    if leaf is not None:
        return leaf
    if depth >= max_depth:
        raise UndecomposableError("decomposition depth limit reached")
    size = len(M) + ncols(M)
    node = _shrinking_three_sum(M, size)
    if node is not None:
        node.children = [decompose(p, depth + 1, max_depth) for p in node.parts(M)]
        return node
    tried = 0
    for i, row in enumerate(M):
        for j, v in enumerate(row):
            if v == 0:
                continue
            tried += 1
            if tried > PIVOT_TRIAL_CAP:
                raise UndecomposableError("pivot trial cap reached")
            P = pivot(M, i, j)
            node = _shrinking_three_sum(P, size)
            if node is not None:
                node.children = [decompose(p, depth + 1, max_depth) for p in node.parts(P)]
                return PivotNode(i, j, node)
    raise UndecomposableError("no base block, 3-sum or pivoted 3-sum found within the caps")


def _shrinking_three_sum(M: Matrix, size: int) -> ThreeSumNode | None:
    n = ncols(M)
    if n > THREE_SUM_COL_CAP:
        raise UndecomposableError(f"{n} columns exceed the 3-sum search cap")
    for nB in range(n // 2, 1, -1):
        for cols_B in itertools.combinations(range(n), nB):
            cols_A = [j for j in range(n) if j not in cols_B]
            node = _assign_rows(M, cols_A, list(cols_B))
            if node is None:
                continue
            MA, MB = node.parts(M)
            if len(MA) + ncols(MA) >= size or len(MB) + ncols(MB) >= size:
                continue
            if tu_check(MA, cap=10).is_tu and tu_check(MB, cap=10).is_tu:
                return node
    return None


def verify_tree(T: Sequence[Sequence[int]], node) -> bool:
    try:
        return recompose(node) == as_matrix(T)
    except (StructureError, IndexError, KeyError):
        return False


# ---------------------------------------------------------------- text form


def tree_to_text(node, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(node, NetworkLeaf):
        return f"{pad}network {json.dumps(node.realization.to_json())}\n"
    if isinstance(node, TransposedNetworkLeaf):
        return f"{pad}transposed {json.dumps(node.realization.to_json())}\n"
    if isinstance(node, CoreLeaf):
        return f"{pad}core {json.dumps({'id': node.core_id, 'trace': node.trace})}\n"
    if isinstance(node, PivotNode):
        return f"{pad}pivot {json.dumps({'row': node.row, 'col': node.col})}\n" + tree_to_text(node.child, indent + 1)
    if isinstance(node, ThreeSumNode):
        d = {k: getattr(node, k) for k in ("rows_A", "cols_A", "rows_B", "cols_B", "e", "f", "g", "h")}
        d["shape"] = list(node.shape)
        out = f"{pad}threesum {json.dumps(d)}\n"
        for c in node.children:
            out += tree_to_text(c, indent + 1)
        return out
    raise StructureError(f"unknown node {node!r}")


def tree_from_text(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pos = 0

    def parse(level: int):
        nonlocal pos
        if pos >= len(lines):
            raise StructureError("truncated decomposition tree")
        ln = lines[pos]
        ind = (len(ln) - len(ln.lstrip(" "))) // 2
        if ind != level:
            raise StructureError(f"bad indentation in decomposition tree line {pos + 1}")
        kind, _, payload = ln.strip().partition(" ")
        d = json.loads(payload)
        pos += 1
        if kind == "network":
            return NetworkLeaf(NetworkRealization.from_json(d))
        if kind == "transposed":
            return TransposedNetworkLeaf(NetworkRealization.from_json(d))
        if kind == "core":
            return CoreLeaf(int(d["id"]), [tuple(op) for op in d["trace"]])
        if kind == "pivot":
            return PivotNode(int(d["row"]), int(d["col"]), parse(level + 1))
        if kind == "threesum":
            node = ThreeSumNode(d["rows_A"], d["cols_A"], d["rows_B"], d["cols_B"], d["e"], d["f"], d["g"], d["h"], tuple(d["shape"]))
            node.children = [parse(level + 1), parse(level + 1)]
            return node
        raise StructureError(f"unknown tree record {kind!r}")

    return parse(0)
