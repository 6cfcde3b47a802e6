"""Exact integer and rational matrix routines.

Matrices are lists of rows of Python ints.  Nothing in here touches floating
point except the vectorised sign search in the TU check, which only ever sees
entries in {-1, 0, 1}.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

TU_EXHAUSTIVE_CAP = 8
TU_SAMPLES = 4000
DELTA_MINOR_CAP = 200_000

Matrix = list[list[int]]


class LinalgError(ValueError):
    pass


class RankDeficientError(LinalgError):
    pass


def as_matrix(M: Sequence[Sequence[int]]) -> Matrix:
    rows = [[int(x) for x in r] for r in M]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise LinalgError("ragged matrix")
    return rows


def key(M: Sequence[Sequence[int]]) -> tuple:
    return tuple(tuple(int(x) for x in r) for r in M)


def shape(M: Sequence[Sequence[int]]) -> tuple[int, int]:
    return (len(M), len(M[0]) if M else 0)


def ncols(M: Sequence[Sequence[int]], default: int = 0) -> int:
    return len(M[0]) if M else default


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence[int]]) -> Matrix:
    return [list(c) for c in zip(*M)] if M else []


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def submatrix(M: Sequence[Sequence[int]], rows: Sequence[int], cols: Sequence[int]) -> Matrix:
    return [[M[i][j] for j in cols] for i in rows]


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free elimination."""
    n = len(M)
    if any(len(r) != n for r in M):
        raise LinalgError("determinant of a non-square matrix")
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            rowi = A[i]
            rowk = A[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def rank(M: Sequence[Sequence]) -> int:
    A = [[Fraction(x) for x in r] for r in M]
    if not A:
        return 0
    k, n = len(A), len(A[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, k) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(k):
            if i != r and A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == k:
            break
    return r


def inverse(M: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            raise LinalgError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        p = A[c][c]
        A[c] = [a / p for a in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [r[n:] for r in A]


def null_vector(M: Sequence[Sequence], n: int) -> list[Fraction] | None:
    """A nonzero x with M x = 0, or None when M has full column rank n."""
    A = [[Fraction(x) for x in r] for r in M]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        A[r] = [a / p for a in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    fc = free[0]
    x = [Fraction(0)] * n
    x[fc] = Fraction(1)
    for i, pc in enumerate(pivots):
        x[pc] = -A[i][fc]
    return x


# ---------------------------------------------------------------- Smith form


@dataclass(frozen=True)
class SnfResult:
    S: Matrix
    D: Matrix
    U: Matrix
    S_inv: Matrix
    U_inv: Matrix

    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), ncols(self.D)))]


def smith_normal_form(M: Sequence[Sequence[int]]) -> SnfResult:
    """Return S, D, U with M = S D U, S and U unimodular.

    Pivot: smallest nonzero absolute value in the active block, ties broken by
    the lowest (row, col).  D is non-negative with d_1 | d_2 | ...
    """
    A = as_matrix(M)
    k = len(A)
    n = ncols(A)
    L, Linv = identity(k), identity(k)
    R, Rinv = identity(n), identity(n)

    # invariant: L M R = A
    def row_add(i, j, c):  # row_i += c row_j
        A[i] = [a + c * b for a, b in zip(A[i], A[j])]
        L[i] = [a + c * b for a, b in zip(L[i], L[j])]
        for r in Linv:
            r[j] -= c * r[i]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        L[i], L[j] = L[j], L[i]
        for r in Linv:
            r[i], r[j] = r[j], r[i]

    def row_neg(i):
        A[i] = [-a for a in A[i]]
        L[i] = [-a for a in L[i]]
        for r in Linv:
            r[i] = -r[i]

    def col_add(j, i, c):  # col_j += c col_i
        for r in A:
            r[j] += c * r[i]
        for r in R:
            r[j] += c * r[i]
        Rinv[i] = [a - c * b for a, b in zip(Rinv[i], Rinv[j])]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in R:
            r[i], r[j] = r[j], r[i]
        Rinv[i], Rinv[j] = Rinv[j], Rinv[i]

    for t in range(min(k, n)):
        while True:
            best = None
            for i in range(t, k):
                for j in range(t, n):
                    v = abs(A[i][j])
                    if v and (best is None or v < best[0]):
                        best = (v, i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                row_swap(t, pi)
            if pj != t:
                col_swap(t, pj)
            p = A[t][t]
            for i in range(t + 1, k):
                if A[i][t]:
                    row_add(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    col_add(j, t, -(A[t][j] // p))
            if any(A[i][t] for i in range(t + 1, k)) or any(A[t][j] for j in range(t + 1, n)):
                continue
            bad = next(
                (i for i in range(t + 1, k) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if A[t][t] < 0:
            row_neg(t)
        if best is None:
            break
    return SnfResult(S=Linv, D=A, U=Rinv, S_inv=L, U_inv=R)


# ---------------------------------------------------------------- TU checks


@dataclass(frozen=True)
class TuReport:
    is_tu: bool
    mode: str  # "exhaustive" or "probabilistic"
    witness: tuple | None = None  # (rows, cols) of a bad square submatrix when known


_SIGNS: dict[int, np.ndarray] = {}


def _signs(s: int) -> np.ndarray:
    if s not in _SIGNS:
        rest = np.array(list(itertools.product((1, -1), repeat=s - 1)), dtype=np.int64).reshape(-1, s - 1)
        _SIGNS[s] = np.hstack([np.ones((rest.shape[0], 1), dtype=np.int64), rest])
    return _SIGNS[s]


def _ghouila_houri(M: np.ndarray) -> tuple | None:
    """Check every column subset admits a signing with sum in {-1,0,1}^k.

    This is equivalent to total unimodularity (Ghouila-Houri).  Returns the
    first failing column subset, or None.
    """
    n = M.shape[1]
    for s in range(2, n + 1):
        signs = _signs(s)
        for cols in itertools.combinations(range(n), s):
            sums = M[:, cols] @ signs.T
            if not (np.abs(sums) <= 1).all(axis=0).any():
                return cols
    return None


def _bad_minor(M: Matrix, cols: list[int], transposed: bool) -> tuple:
    """Square submatrix with |det| > 1 inside the lines that fail the bicolouring test."""
    lines = [list(c) for c in zip(*M)] if transposed else M
    n_other = len(lines)
    for s in range(2, len(cols) + 1):
        for cs in itertools.combinations(cols, s):
            for rs in itertools.combinations(range(n_other), s):
                if abs(determinant([[lines[r][c] for c in cs] for r in rs])) > 1:
                    return (cs, rs) if transposed else (rs, cs)
    raise LinalgError("internal error: bicolouring failed but every minor is unimodular")


@lru_cache(maxsize=4096)
def _tu_cached(Mk: tuple, cap: int, samples: int, seed: int) -> TuReport:
    M = [list(r) for r in Mk]
    if any(x not in (-1, 0, 1) for r in M for x in r):
        for i, r in enumerate(M):
            for j, x in enumerate(r):
                if x not in (-1, 0, 1):
                    return TuReport(False, "exhaustive", ((i,), (j,)))
    k, n = shape(M)
    if k == 0 or n == 0:
        return TuReport(True, "exhaustive")
    if min(k, n) <= cap:
        arr = np.array(M, dtype=np.int64)
        if n > k:
            arr = arr.T
        bad = _ghouila_houri(arr)
        if bad is None:
            return TuReport(True, "exhaustive")
        return TuReport(False, "exhaustive", _bad_minor(M, [int(c) for c in bad], transposed=n > k))
    rng = random.Random(seed)
    for _ in range(samples):
        s = rng.randint(2, min(k, n))
        rows = sorted(rng.sample(range(k), s))
        cols = sorted(rng.sample(range(n), s))
        if abs(determinant(submatrix(M, rows, cols))) > 1:
            return TuReport(False, "probabilistic", (tuple(rows), tuple(cols)))
    return TuReport(True, "probabilistic")


def tu_check(M: Sequence[Sequence[int]], cap: int = TU_EXHAUSTIVE_CAP, samples: int = TU_SAMPLES, seed: int = 0) -> TuReport:
    return _tu_cached(key(M), cap, samples, seed)


def is_totally_unimodular(M: Sequence[Sequence[int]], cap: int = TU_EXHAUSTIVE_CAP, samples: int = TU_SAMPLES, seed: int = 0) -> bool:
    return tu_check(M, cap, samples, seed).is_tu


def delta_modularity(A: Sequence[Sequence[int]], cap: int = DELTA_MINOR_CAP) -> tuple[int, bool]:
    """(max |n x n minor|, whether every nonzero n x n minor has that value)."""
    k, n = shape(A)
    if n == 0 or k < n:
        raise RankDeficientError("matrix does not have full column rank")
    total = 1
    for i in range(n):
        total = total * (k - i) // (i + 1)
    if total > cap:
        raise LinalgError(f"{total} minors exceed the enumeration cap {cap}")
    values = set()
    for rows in itertools.combinations(range(k), n):
        d = abs(determinant([A[i] for i in rows]))
        if d:
            values.add(d)
    if not values:
        raise RankDeficientError("matrix does not have full column rank")
    delta = max(values)
    return delta, len(values) == 1


# ---------------------------------------------------------------- exact LP


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: tuple | None = None
    value: Fraction | None = None


def _simplex(Ain: list[list[int]], bin_: list[int], c: list[int], basis_hint: list[int | None]) -> tuple[str, list[Fraction] | None]:
    """min c z, A z = b, z >= 0 with integer data, Bland's rule.

    The tableau is kept integral: the true tableau equals Q / den (Edmonds'
    integer-preserving pivoting).  basis_hint[i] names a column that is a
    unit vector with +1 in row i, if there is one; other rows get artificials.
    """
    m = len(Ain)
    N = len(c)
    art_rows = [i for i in range(m) if basis_hint[i] is None]
    W = N + len(art_rows)
    Q = []
    basis = []
    a = 0
    for i in range(m):
        row = list(Ain[i]) + [0] * len(art_rows) + [bin_[i]]
        if basis_hint[i] is None:
            row[N + a] = 1
            basis.append(N + a)
            a += 1
        else:
            basis.append(basis_hint[i])
        Q.append(row)
    den = 1

    def pivot(r: int, s: int):
        nonlocal den
        p = Q[r][s]
        rowr = Q[r]
        for i in range(len(Q)):
            if i == r:
                continue
            qi = Q[i]
            f = qi[s]
            if f == 0:
                Q[i] = [(x * p) // den for x in qi]
            else:
                Q[i] = [(x * p - f * y) // den for x, y in zip(qi, rowr)]
        den = p
        if den < 0:
            for i in range(len(Q)):
                Q[i] = [-x for x in Q[i]]
            den = -den
        basis[r] = s

    def run(obj_row: int, allowed: int) -> str:
        while True:
            obj = Q[obj_row]
            s = next((j for j in range(allowed) if obj[j] < 0), None)
            if s is None:
                return "optimal"
            r = None
            for i in range(m):
                qis = Q[i][s]
                if qis > 0:
                    if r is None:
                        r = i
                        continue
                    lhs = Q[i][-1] * Q[r][s]
                    rhs = Q[r][-1] * qis
                    if lhs < rhs or (lhs == rhs and basis[i] < basis[r]):
                        r = i
            if r is None:
                return "unbounded"
            pivot(r, s)

    if art_rows:
        ph1 = [0] * (W + 1)
        for i in art_rows:
            ph1 = [x - y for x, y in zip(ph1, Q[i])]
        for j in range(N, W):
            ph1[j] = 0
        Q.append(ph1)
        run(m, W)
        if Q[m][-1] != 0:
            return "infeasible", None
        Q.pop()
        # drive artificials out of the basis or drop redundant rows
        i = 0
        while i < len(basis):
            if basis[i] >= N:
                s = next((j for j in range(N) if Q[i][j] != 0), None)
                if s is None:
                    Q.pop(i)
                    basis.pop(i)
                    m -= 1
                    continue
                pivot(i, s)
            i += 1
        Q = [r[:N] + [r[-1]] for r in Q]
    obj = [den * cj for cj in c] + [0]
    for i in range(m):
        cb = c[basis[i]]
        if cb:
            obj = [x - cb * y for x, y in zip(obj, Q[i])]
    Q.append(obj)
    status = run(m, N)
    if status != "optimal":
        return status, None
    z = [Fraction(0)] * N
    for i in range(m):
        z[basis[i]] = Fraction(Q[i][-1], den)
    return "optimal", z


def _purify(T: Matrix, b: list[int], x: list[Fraction]) -> list[Fraction]:
    """Move a feasible point to a vertex when {Tx <= b} is pointed."""
    n = len(x)
    while True:
        tight = [T[i] for i in range(len(T)) if sum(a * v for a, v in zip(T[i], x)) == b[i]]
        d = null_vector(tight, n)
        if d is None:
            return x
        moved = False
        for sgn in (1, -1):
            dd = [sgn * v for v in d]
            step = None
            for i, row in enumerate(T):
                td = sum(a * v for a, v in zip(row, dd))
                if td > 0:
                    t = (b[i] - sum(a * v for a, v in zip(row, x))) / td
                    if step is None or t < step:
                        step = t
            if step is not None:
                x = [v + step * w for v, w in zip(x, dd)]
                moved = True
                break
        if not moved:
            # lineality direction: not pointed, any feasible point will do
            return x


@lru_cache(maxsize=200_000)
def _lp_cached(Tk: tuple, bk: tuple, ck: tuple | None, vertex: bool) -> LpResult:
    T = [list(r) for r in Tk]
    b = list(bk)
    k = len(T)
    n = len(T[0]) if T else (len(ck) if ck else 0)
    if k == 0:
        if ck and any(ck):
            return LpResult("unbounded")
        return LpResult("optimal", tuple(Fraction(0) for _ in range(n)), Fraction(0))
    # x = xp - xm, slack s: [T, -T, I] z = b
    A = []
    rhs = []
    hint: list[int | None] = []
    for i in range(k):
        row = list(T[i]) + [-v for v in T[i]] + [int(i == j) for j in range(k)]
        if b[i] < 0:
            A.append([-v for v in row])
            rhs.append(-b[i])
            hint.append(None)
        else:
            A.append(row)
            rhs.append(b[i])
            hint.append(2 * n + i)
    cost = [0] * (2 * n + k)
    if ck:
        for j, cj in enumerate(ck):
            cost[j] = cj
            cost[n + j] = -cj
    status, z = _simplex(A, rhs, cost, hint)
    if status != "optimal":
        return LpResult(status)
    x = [z[j] - z[n + j] for j in range(n)]
    if vertex:
        x = _purify(T, b, x)
    value = sum(Fraction(cj) * v for cj, v in zip(ck, x)) if ck else Fraction(0)
    return LpResult("optimal", tuple(x), value)


def lp_solve(T: Sequence[Sequence[int]], b: Sequence[int], c: Sequence[int] | None = None, vertex: bool = True) -> LpResult:
    """Minimise c^T x over {x : T x <= b}; with c=None only feasibility."""
    ck = tuple(int(v) for v in c) if c is not None else None
    return _lp_cached(key(T), tuple(int(v) for v in b), ck, vertex)


def lp_feasible_vertex(T: Sequence[Sequence[int]], b: Sequence[int]) -> list[Fraction] | None:
    """A vertex of {x : Tx <= b} (any point if not pointed), None if empty."""
    res = lp_solve(T, b)
    return None if res.status == "infeasible" else list(res.x)


def lp_feasible(T: Sequence[Sequence[int]], b: Sequence[int]) -> bool:
    return lp_solve(T, b, vertex=False).status != "infeasible"


def lp_bounds(T: Sequence[Sequence[int]], b: Sequence[int], c: Sequence[int]) -> tuple[Fraction | None, Fraction | None] | None:
    """(min, max) of c^T x over the polyhedron; None entries mean unbounded, None overall means empty."""
    lo = lp_solve(T, b, c, vertex=False)
    if lo.status == "infeasible":
        return None
    hi = lp_solve(T, b, [-v for v in c], vertex=False)
    return (
        lo.value if lo.status == "optimal" else None,
        -hi.value if hi.status == "optimal" else None,
    )


def integer_vertex(T: Sequence[Sequence[int]], b: Sequence[int]) -> tuple[int, ...] | None:
    """LP vertex of a TU system, checked to be integral and feasible."""
    x = lp_feasible_vertex(T, b)
    if x is None:
        return None
    if any(v.denominator != 1 for v in x):
        raise LinalgError("fractional vertex; matrix is not totally unimodular")
    xi = tuple(int(v) for v in x)
    if any(sum(a * v for a, v in zip(row, xi)) > bi for row, bi in zip(T, b)):
        raise LinalgError("LP vertex violates the system")
    return xi
