"""The twelve acceptance criteria, one test each, at their stated sizes and time limits.

Run with ``pytest tests/test_acceptance.py``; a pass/fail line per criterion
is printed in the terminal summary.
"""

from __future__ import annotations

import itertools
import random
import time
from functools import lru_cache

import pytest

from corpus import E2E_SEEDS, corpus_instance, three_sum_subproblems
from gctuf.base_lattice import c_set, solve_gclf
from gctuf.base_network import gcc_to_xlc_lengths, solve_gcc
from gctuf.exact_linalg import delta_modularity, determinant, is_totally_unimodular, matmul, smith_normal_form, tu_check
from gctuf.generators import delta_modular_ip, random_gcc, random_gclf
from gctuf.groups import TargetSet, all_subgroups, find_vanishing_subset, groups_up_to
from gctuf.instances import GctufInstance
from gctuf.ip_reduction import reduce_ip
from gctuf.oracle import all_circulations, brute_gcc, brute_gclf, brute_gctuf, enumerate_points
from gctuf.rgctuf import DIRECTIONS, Pattern, averaging_pair, call_bound, combine_check, pivot_transform, solve_with_report
from gctuf.tu_structure import pivot


def _shift(p, v, k=1):
    return (p[0] + k * v[0], p[1] + k * v[1])


def _report(num: int, line: str) -> None:
    print(f"criterion {num}: {line}")


# ---------------------------------------------------------------- 1


def _stabilizer_trivial(R: frozenset, subgroups) -> bool:
    return all(H.is_trivial() or any((r + h) not in R for r in R for h in H.elements) for H in subgroups)


@pytest.mark.acceptance(1, "X + Y meets R for |X| = d and |Y| >= 2, |G| <= 8")
def test_c01_sumset_hits_target():
    """(X + Y) meets R whenever |X| = |G| - |R|, |Y| >= 2 and R has trivial stabiliser.

    For fixed R and X the condition over all Y with |Y| >= 2 is equivalent to:
    at most one y has (X + y) disjoint from R.  For |G| <= 6 every Y is also
    enumerated directly, which cross-checks that equivalence.
    """
    t0 = time.perf_counter()
    violations = 0
    cases = 0
    for G in groups_up_to(8):
        if G.order < 2:
            continue
        els = G.elements()
        subs = [H for H in all_subgroups(G) if not H.is_trivial()]
        for size in range(1, G.order):
            for R in itertools.combinations(els, size):
                Rs = frozenset(R)
                if not _stabilizer_trivial(Rs, subs):
                    continue
                d = G.order - size
                for X in itertools.combinations(els, d):
                    cases += 1
                    misses = [y for y in els if not any((x + y) in Rs for x in X)]
                    if len(misses) > 1:
                        violations += 1
                    if G.order <= 6:
                        for k in range(2, G.order + 1):
                            for Y in itertools.combinations(els, k):
                                if not any((x + y) in Rs for x in X for y in Y):
                                    violations += 1
    el = time.perf_counter() - t0
    _report(1, f"{cases} (R, X) cases, {violations} violations, {el:.1f} s")
    assert violations == 0
    assert el < 60


# ---------------------------------------------------------------- 2


@pytest.mark.acceptance(2, "every |G|-length sequence has a vanishing subset, |G| <= 6")
def test_c02_vanishing_subsets():
    t0 = time.perf_counter()
    failures = 0
    seqs = 0
    for G in groups_up_to(6):
        for seq in itertools.product(G.elements(), repeat=G.order):
            seqs += 1
            idx = find_vanishing_subset(seq)
            if not idx:
                failures += 1
                continue
            s = G.zero
            for i in idx:
                s = s + seq[i]
            if not s.is_zero() or len(set(idx)) != len(idx):
                failures += 1
    el = time.perf_counter() - t0
    _report(2, f"{seqs} sequences, {failures} failures, {el:.1f} s")
    assert failures == 0
    assert el < 60


# ---------------------------------------------------------------- 3 and 4


def _z4_patterns():
    from gctuf.groups import AbelianGroup

    G = AbelianGroup((4,))
    e = G.element
    pa = Pattern.of("A", {(0, 0): [e(0), e(1), e(2)], (1, 0): [e(0), e(1)], (2, 0): [e(0)]})
    pb = Pattern.of("B", {(0, 0): [e(1)], (1, 0): [e(0), e(1)], (2, 0): [e(0)]})
    return G, pa, pb


@pytest.mark.acceptance(3, "Z/4 pattern tables combine at (0, 0) only")
def test_c03_z4_pattern_combination():
    G, pa, pb = _z4_patterns()
    R = TargetSet.of(G, [G.element(3)])
    hit = combine_check(pa, pb, R, [(0, 0)])
    assert hit is not None and hit.pair == (0, 0)
    assert (hit.r_A, hit.r_B) == (G.element(2), G.element(1))
    assert combine_check(pa, pb, R, [(1, 0)]) is None
    assert combine_check(pa, pb, R, [(2, 0)]) is None
    whole = combine_check(pa, pb, R)
    assert whole is not None and whole.pair == (0, 0)
    _report(3, "only (0,0) combines, 2 + 1 = 3")


def _propagation_violations(pi_A: dict, pairs: set, d: int) -> list:
    """Pairs p, directions v with |pi_A(p)| >= d + 1 and p + 2v present but |pi_A(p + v)| < d."""
    out = []
    checked = 0
    for p in sorted(pairs):
        if len(pi_A.get(p, ())) < d + 1:
            continue
        for v in DIRECTIONS:
            if _shift(p, v, 2) in pairs:
                checked += 1
                if len(pi_A.get(_shift(p, v), ())) < d:
                    out.append((p, v))
    return out, checked


@pytest.mark.acceptance(4, "propagation fails at depth 4 and holds on the depth <= 3 corpus")
def test_c04_propagation_boundary():
    from gctuf.groups import AbelianGroup

    G = AbelianGroup((5,))
    e = G.element
    pi_A = {(0, 0): set(map(e, range(5))), (1, 0): {e(0), e(1), e(2)}, (2, 0): {e(0)}}
    bad, _ = _propagation_violations(pi_A, set(pi_A), 4)
    assert bad == [((0, 0), (1, 0))]
    assert len(pi_A[(1, 0)]) == 3
    corpus_bad = 0
    checked = 0
    for seed, inst, node, bp in three_sum_subproblems():
        assert inst.depth <= 3
        v, c = _propagation_violations(bp.pi_A, set(bp.pairs), inst.depth)
        corpus_bad += len(v)
        checked += c
    _report(4, f"depth-4 table violates at (0,0) v=(1,0); corpus: {checked} applicable checks, {corpus_bad} violations")
    assert checked > 0
    assert corpus_bad == 0


# ---------------------------------------------------------------- 5


@pytest.mark.acceptance(5, "Reduction fidelity on 500 strictly Delta-modular IPs")
def test_c05_reduction_fidelity():
    t0 = time.perf_counter()
    mismatches = 0
    deltas = set()
    for seed in range(500):
        ip, _ = delta_modular_ip(seed)
        delta, strict = delta_modularity(ip.A)
        assert strict and delta <= 4
        deltas.add(delta)
        mcctu, H = reduce_ip(ip)
        ok = mcctu.modulus_product == delta and is_totally_unimodular(mcctu.T)
        xs = enumerate_points(ip.A, ip.b)
        image = {tuple(sum(h * v for h, v in zip(row, x)) for row in H) for x in xs}
        ys = {y for y in enumerate_points(mcctu.T, mcctu.b) if all(cg.holds(y) for cg in mcctu.congruencies)}
        ok = ok and image == ys and len(image) == len(xs)
        for x in xs:
            y = [sum(h * v for h, v in zip(row, x)) for row in H]
            ok = ok and sum(c * v for c, v in zip(mcctu.c_bar, y)) == sum(c * v for c, v in zip(ip.c, x))
        mismatches += not ok
    el = time.perf_counter() - t0
    _report(5, f"500 IPs, Delta values {sorted(deltas)}, {mismatches} mismatches, {el:.1f} s")
    assert mismatches == 0
    assert el < 300


# ---------------------------------------------------------------- 6 and 10


@lru_cache(maxsize=None)
def _end_to_end():
    t0 = time.perf_counter()
    rows = []
    for seed in E2E_SEEDS:
        inst = corpus_instance(seed)
        rep = solve_with_report(inst, "safe", seed)
        ref = brute_gctuf(inst)
        rows.append((seed, inst, rep, ref.feasible))
    return rows, time.perf_counter() - t0


@pytest.mark.acceptance(6, "End-to-end oracle equivalence on 500 decomposable instances")
def test_c06_end_to_end():
    rows, el = _end_to_end()
    mismatches = 0
    for seed, inst, rep, ref in rows:
        assert inst.G.order <= 4 and inst.depth <= 3 and inst.n <= 12
        if rep.feasible != ref or (rep.feasible and not inst.is_solution(rep.witness)):
            mismatches += 1
    feas = sum(r[3] for r in rows)
    _report(6, f"{len(rows)} instances ({feas} feasible), {mismatches} mismatches, {el:.1f} s including the oracle")
    assert mismatches == 0
    assert el < 600


@pytest.mark.acceptance(10, "Call accounting against the recursion bound")
def test_c10_call_accounting():
    from gctuf.generators import planted_instance

    violations = 0
    rows, _ = _end_to_end()
    for seed, inst, rep, _ref in rows:
        if rep.calls > call_bound(inst.n, inst.depth):
            violations += 1
    # d = 0 uses no base-block call; n <= 3 with d > 0 uses at most one
    small = 0
    for seed in range(200):
        gen = planted_instance(seed, random.Random(seed).choice(("network", "transposed", "core")), 3)
        inst = gen.instance
        if inst.n > 3:
            continue
        small += 1
        rep = solve_with_report(inst)
        if rep.calls > call_bound(inst.n, inst.depth):
            violations += 1
        full = GctufInstance(inst.T, inst.b, inst.G, inst.gamma, TargetSet.full(inst.G))
        if solve_with_report(full).calls != 0:
            violations += 1
    assert call_bound(7, 0) == 0 and call_bound(3, 2) == 1
    worst = max(r[2].calls / call_bound(r[1].n, r[1].depth) for r in rows if r[1].depth)
    _report(10, f"{len(rows)} corpus solves and {small} small solves, {violations} violations, max calls/bound {worst:.2g}")
    assert violations == 0


# ---------------------------------------------------------------- 7


@pytest.mark.acceptance(7, "GCLF against member enumeration, |N| <= 12, |G| <= 6")
def test_c07_gclf():
    t0 = time.perf_counter()
    mismatches = 0
    feasible = 0
    for seed in range(400):
        inst = random_gclf(seed)
        sols = brute_gclf(inst)
        X = solve_gclf(inst)
        if (X is not None) != bool(sols):
            mismatches += 1
            continue
        if X is None:
            continue
        feasible += 1
        if X not in sols:
            mismatches += 1
        # some feasible member has a code smaller than the group
        if min(len(c_set(S, inst.lattice)) for S in sols) >= inst.G.order:
            mismatches += 1
        if len(c_set(X, inst.lattice)) >= inst.G.order:
            mismatches += 1
    el = time.perf_counter() - t0
    _report(7, f"400 instances ({feasible} feasible), {mismatches} mismatches, {el:.1f} s")
    assert mismatches == 0
    assert el < 120


# ---------------------------------------------------------------- 8


@pytest.mark.acceptance(8, "GCC length encoding and solve_gcc on 500 seeds")
def test_c08_gcc():
    t0 = time.perf_counter()
    decode_bad = 0
    circs = 0
    mismatches = 0
    feasible = 0
    for seed in range(500):
        gcc = random_gcc(seed)
        assert gcc.n_vertices <= 5 and max(gcc.caps) <= 3
        enc, lt = gcc_to_xlc_lengths(gcc)
        for f in all_circulations(gcc.n_vertices, gcc.arcs, gcc.caps):
            circs += 1
            L, tallies = enc.decode(sum(a * x for a, x in zip(lt, f)))
            want = tuple(sum(eta.residues[i] * x for eta, x in zip(gcc.labels, f)) for i in range(enc.k))
            decode_bad += (L, tallies) != (gcc.length(f), want)
        ref = brute_gcc(gcc)
        got = solve_gcc(gcc)
        if (got is not None) != ref.feasible:
            mismatches += 1
        elif got is not None:
            feasible += 1
            if not gcc.is_feasible(got) or gcc.length(got) != ref.length:
                mismatches += 1
    el = time.perf_counter() - t0
    _report(8, f"{circs} circulations decoded ({decode_bad} bad); 500 instances ({feasible} feasible), {mismatches} mismatches, {el:.1f} s")
    assert decode_bad == 0 and mismatches == 0
    assert el < 300


# ---------------------------------------------------------------- 9


@pytest.mark.acceptance(9, "Smith normal form on 1000 matrices up to 6x6")
def test_c09_snf():
    t0 = time.perf_counter()
    rng = random.Random(9)
    failures = 0
    for _ in range(1000):
        k, n = rng.randint(1, 6), rng.randint(1, 6)
        M = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(k)]
        r = smith_normal_form(M)
        diag = r.diagonal()
        ok = matmul(matmul(r.S, r.D), r.U) == M
        ok = ok and abs(determinant(r.S)) == 1 and abs(determinant(r.U)) == 1
        ok = ok and all(r.D[i][j] == 0 for i in range(k) for j in range(n) if i != j)
        ok = ok and all(x >= 0 for x in diag)
        ok = ok and all((diag[i + 1] % diag[i] == 0) if diag[i] else diag[i + 1] == 0 for i in range(len(diag) - 1))
        failures += not ok
    el = time.perf_counter() - t0
    _report(9, f"1000 matrices, {failures} failures, {el:.1f} s")
    assert failures == 0
    assert el < 60


# ---------------------------------------------------------------- 11


def _value_map(inst: GctufInstance) -> dict:
    return {x: inst.group_value(x) for x in enumerate_points(inst.T, inst.b)}


@pytest.mark.acceptance(11, "Pivoting keeps TU; pivot_transform keeps feasible sets")
def test_c11_pivoting():
    t0 = time.perf_counter()
    tu_bad = 0
    modes = set()
    for seed in E2E_SEEDS:
        inst = corpus_instance(seed)
        core = [list(r) for r in inst.T[: inst.k - 2 * inst.n]]  # drop the box rows
        nz = [(i, j) for i, r in enumerate(core) for j, v in enumerate(r) if v]
        i, j = random.Random(seed).choice(nz)
        rep = tu_check(pivot(core, i, j), cap=12)
        modes.add(rep.mode)
        tu_bad += not rep.is_tu
    map_bad = 0
    for seed in range(200):
        inst = corpus_instance(seed)
        rng = random.Random(seed)
        i, j = rng.choice([(i, j) for i, r in enumerate(inst.T) for j, v in enumerate(r) if v])
        pt = pivot_transform(inst, i, j)
        before = _value_map(inst)
        after = _value_map(pt.instance)
        mapped = {pt.to_y(x): g for x, g in before.items()}
        ok = mapped == after and all(pt.to_x(pt.to_y(x)) == x for x in before)
        map_bad += not ok
    el = time.perf_counter() - t0
    _report(11, f"{len(E2E_SEEDS)} pivots TU-checked ({', '.join(sorted(modes))}), {tu_bad} lost TU; 200 transforms, {map_bad} mismatches, {el:.1f} s")
    assert tu_bad == 0 and map_bad == 0


# ---------------------------------------------------------------- 12


@pytest.mark.acceptance(12, "Averaging witnesses on 100 3-sum subproblems")
def test_c12_averaging():
    t0 = time.perf_counter()
    violations = 0
    applicable = 0
    combos = 0
    for seed, inst, node, bp in three_sum_subproblems():
        pairs = set(bp.pairs)
        for pts in (bp.points_A, bp.points_B):
            for p in sorted(pairs):
                for v in DIRECTIONS:
                    q = _shift(p, v, 2)
                    if q not in pairs:
                        continue
                    applicable += 1
                    mid = pts.get(_shift(p, v), [])
                    for x1 in pts[p]:
                        for x2 in pts[q]:
                            combos += 1
                            violations += averaging_pair(mid, x1, x2) is None
    el = time.perf_counter() - t0
    _report(12, f"100 subproblems, {applicable} (pair, v) cases, {combos} solution pairs, {violations} violations, {el:.1f} s")
    assert applicable > 0
    assert violations == 0
