from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import corpus_instance, three_sum_subproblems
from gctuf.exact_linalg import integer_vertex
from gctuf.generators import planted_instance, random_network
from gctuf.groups import AbelianGroup, TargetSet
from gctuf.instances import GctufInstance
from gctuf.oracle import brute_gctuf, enumerate_points
from gctuf.rgctuf import (
    LinearFitError,
    Pattern,
    PatternShape,
    Solver,
    SolverError,
    classify_pairs,
    combine_check,
    compute_pattern_shape,
    coset_reduce,
    linking_values,
    pivot_transform,
    solve,
    solve_with_report,
    split_three_sum,
    stitch,
    type3_shrink,
    type14_reduce,
)
from gctuf.tu_structure import ThreeSumNode

Z4 = AbelianGroup((4,))


def _box(n, lo=0, hi=2):
    T = [[int(i == j) for j in range(n)] for i in range(n)] + [[-int(i == j) for j in range(n)] for i in range(n)]
    return T, [hi] * n + [-lo] * n


# ---------------------------------------------------------------- dispatch and accounting


def test_depth_zero_returns_vertex_without_calls():
    T, b = _box(2)
    inst = GctufInstance(T, b, Z4, [Z4.element(1)] * 2, TargetSet.full(Z4))
    rep = solve_with_report(inst)
    assert rep.feasible and rep.calls == 0
    assert rep.witness == integer_vertex(T, b)


def test_base_network_instance_uses_one_call():
    gen = next(g for g in (planted_instance(s, "network", 3) for s in range(50)) if g.instance.depth > 0)
    rep = solve_with_report(gen.instance)
    assert rep.feasible and rep.verified and rep.calls == 1 and not rep.fallbacks


def test_reports_are_deterministic():
    inst = corpus_instance(17)
    assert solve_with_report(inst, seed=3).lines() == solve_with_report(inst, seed=3).lines()


# ---------------------------------------------------------------- coset reduction


def test_coset_reduce_examples():
    T, b = _box(1)
    inst = GctufInstance(T, b, Z4, [Z4.element(1)], TargetSet.of(Z4, [1, 3]))
    red = coset_reduce(inst)
    assert inst.depth == 2 and red.G.order == 2 and red.depth == 1
    assert red.R.elements == {red.G.element(1)}
    same = GctufInstance(T, b, Z4, [Z4.element(1)], TargetSet.of(Z4, [3]))
    assert coset_reduce(same) == same
    full = coset_reduce(GctufInstance(T, b, Z4, [Z4.element(1)], TargetSet.full(Z4)))
    assert full.G.order == 1


def test_coset_reduce_preserves_solutions():
    for seed in range(60):
        inst = corpus_instance(seed)
        red = coset_reduce(inst)
        for x in enumerate_points(inst.T, inst.b)[:50]:
            assert inst.is_solution(x) == red.is_solution(x)


# ---------------------------------------------------------------- 3-sum splitting


def test_split_block_diagonal():
    N1, _ = random_network(1, 3, 2)
    N2, _ = random_network(2, 3, 2)
    T = [r + [0, 0] for r in N1] + [[0, 0] + r for r in N2]
    node = ThreeSumNode(list(range(len(N1))), [0, 1], list(range(len(N1), len(T))), [2, 3], [0] * len(N1), [0, 0], [0] * len(N2), [0, 0])
    b = [1] * len(T)
    G = AbelianGroup((2,))
    inst = GctufInstance(T, b, G, [G.zero] * 4, TargetSet.full(G))
    sub_A, sub_B = split_three_sum(inst, node, 0, 0)
    assert [list(r) for r in sub_A.T[: len(N1)]] == N1 and list(sub_A.b[: len(N1)]) == [1] * len(N1)
    assert [list(r) for r in sub_B.T[: len(N2)]] == N2


def test_split_at_planted_linking_values():
    for seed, inst, node, bp in three_sum_subproblems()[:40]:
        ref = brute_gctuf(inst)
        if not ref.feasible:
            continue
        x = ref.witness
        a, b = linking_values(node, x)
        sub_A, sub_B = split_three_sum(inst, node, a, b)
        x_A = tuple(x[j] for j in node.cols_A)
        x_B = tuple(x[j] for j in node.cols_B)
        assert sub_A.satisfies_system(x_A) and sub_B.satisfies_system(x_B)
        assert stitch(inst.n, node, x_A, x_B) == tuple(x)
        # alpha beyond every attainable value leaves the B-problem empty
        hi = max(p[0] for p in bp.pairs) + 50
        _, far = split_three_sum(inst, node, hi, b)
        assert not enumerate_points(far.T, far.b)


# ---------------------------------------------------------------- shapes and patterns


def test_pattern_shape_depth_zero_is_one_pair():
    for seed, inst, node, bp in three_sum_subproblems()[:20]:
        full = inst.with_targets(TargetSet.full(inst.G))
        shape, pairs = compute_pattern_shape(full, node, "window")
        assert len(pairs) <= 1
        if shape is not None:
            assert shape.widths == (0, 0, 0)


@pytest.mark.parametrize("mode", ["safe", "window"])
def test_shape_holds_a_solution_pair(mode):
    missing = 0
    for seed, inst, node, bp in three_sum_subproblems():
        sols = [x for x in enumerate_points(inst.T, inst.b) if inst.group_value(x) in inst.R]
        if not sols:
            continue
        _, pairs = compute_pattern_shape(inst, node, mode)
        missing += not any(linking_values(node, x) in set(pairs) for x in sols)
    assert missing == 0


def test_pi_bar_examples():
    s = Solver()
    T, b = _box(1)
    G1 = AbelianGroup(())
    triv = GctufInstance(T, b, G1, [G1.zero], TargetSet.full(G1))
    assert set(s.pi_bar("A", triv, 1, 0)) == {G1.zero}
    three = GctufInstance(T, b, Z4, [Z4.element(1)], TargetSet.full(Z4))
    assert set(s.pi_bar("A", three, 3, 0)) == {Z4.element(0), Z4.element(1), Z4.element(2)}
    single = GctufInstance([[1], [-1]], [1, -1], Z4, [Z4.element(3)], TargetSet.full(Z4))
    assert set(s.pi_bar("B", single, 4, 0)) == {Z4.element(3)}


def test_combine_check_empty_targets():
    pa = Pattern.of("A", {(0, 0): [Z4.element(1)]})
    pb = Pattern.of("B", {(0, 0): [Z4.element(2)]})
    assert combine_check(pa, pb, TargetSet(Z4, frozenset())) is None


STAIRCASE = {(0, 0): "vertex", (1, 0): "border", (2, 0): "vertex", (0, 1): "border", (1, 1): "interior", (2, 1): "vertex", (0, 2): "vertex", (1, 2): "vertex"}


def test_classify_three_by_three_staircase():
    shape = PatternShape(0, 3, 0, 2, 0, 2)
    assert set(shape.pairs()) == set(STAIRCASE)
    assert classify_pairs(shape).kinds == STAIRCASE


def test_classify_single_pair():
    cls = classify_pairs([(0, 0)], Pattern.of("B", {(0, 0): [Z4.zero]}))
    assert cls.kinds == {(0, 0): "vertex"} and cls.structure in ("I", "IV")


def test_shapes_without_interior_have_few_vertices():
    seen = 0
    for l1, u1, l2, u2 in itertools.product(range(4), repeat=4):
        if l1 > u1 or l2 > u2:
            continue
        for l0 in range(l1 + l2, u1 + u2 + 1):
            for u0 in range(l0, u1 + u2 + 1):
                shape = PatternShape(l0, u0, l1, u1, l2, u2)
                if not shape.pairs():
                    continue
                cls = classify_pairs(shape)
                if not cls.of_kind("interior"):
                    seen += 1
                    assert len(cls.of_kind("vertex")) <= 4
    assert seen > 0


def test_type3_shrink_is_strict():
    shape = PatternShape(0, 3, 0, 2, 0, 1)  # 3x2 block: border pairs, no interior
    for size in (1, 2):
        pb = Pattern.of("B", {p: [Z4.element(i) for i in range(size)] for p in shape.pairs()})
        out = type3_shrink(shape, pb)
        assert 0 < len(out) < len(shape.pairs()) and set(out) <= set(shape.pairs())


def test_type3_shrink_refuses_a_segment_with_single_values():
    shape = PatternShape(0, 2, 0, 2, 0, 0)
    pb = Pattern.of("B", {p: [Z4.zero] for p in shape.pairs()})
    with pytest.raises(SolverError):
        type3_shrink(shape, pb)


# ---------------------------------------------------------------- hidden solutions


def test_hidden_solutions_have_singleton_b_and_large_a():
    for seed, inst, node, bp in three_sum_subproblems():
        d = inst.depth
        if d == 0:
            continue  # depth 0 is answered by the vertex
        s = Solver()
        for p in bp.pairs:
            sub_A, sub_B = split_three_sum(inst, node, *p)
            pa = Pattern("A", {p: s.pi_bar("A", sub_A, d, 0)})
            pb = Pattern("B", {p: s.pi_bar("B", sub_B, d + 1, 0)})
            exists = any(a + b in inst.R for a in bp.pi_A[p] for b in bp.pi_B[p])
            if exists and combine_check(pa, pb, inst.R, [p]) is None:
                assert len(bp.pi_B[p]) == 1 and len(bp.pi_A[p]) >= d + 1


def test_type14_reduction_is_exact_on_its_pairs():
    built = 0
    for seed, inst, node, bp in three_sum_subproblems():
        single = [p for p in bp.pairs if len(bp.pi_B[p]) == 1]
        if not single:
            continue
        try:
            red = type14_reduce(inst, node, single, Pattern.of("B", bp.pi_B))
        except LinearFitError:
            continue
        built += 1
        pts = [x for x in enumerate_points(inst.T, inst.b) if inst.group_value(x) in inst.R]
        want = any(linking_values(node, x) in set(single) for x in pts)
        got = brute_gctuf(red.instance)
        assert got.feasible == want
        if got.feasible:
            assert inst.is_solution(red.lift(got.witness))
    assert built > 0


# ---------------------------------------------------------------- pivoting


def test_pivot_transform_trivial_group():
    G1 = AbelianGroup(())
    T = [[1, 1], [1, -1], [-1, 0], [0, -1]]
    inst = GctufInstance(T, [2, 1, 0, 0], G1, [G1.zero] * 2, TargetSet.full(G1))
    pt = pivot_transform(inst, 0, 0)
    before = enumerate_points(inst.T, inst.b)
    after = enumerate_points(pt.instance.T, pt.instance.b)
    assert sorted(pt.to_y(x) for x in before) == sorted(after)


def test_pivot_transform_two_by_two():
    # x0 + x1 <= 1 with 0 <= x <= 1; pivot on (0, 0): y0 = x0 + x1
    T = [[1, 1], [-1, 0], [0, -1], [1, 0], [0, 1]]
    inst = GctufInstance(T, [1, 0, 0, 1, 1], Z4, [Z4.element(1), Z4.element(2)], TargetSet.full(Z4))
    pt = pivot_transform(inst, 0, 0)
    assert sorted(enumerate_points(pt.instance.T, pt.instance.b)) == sorted(pt.to_y(x) for x in [(0, 0), (0, 1), (1, 0)])
    for x in [(0, 0), (0, 1), (1, 0)]:
        assert pt.instance.group_value(pt.to_y(x)) == inst.group_value(x)


# ---------------------------------------------------------------- end to end


@settings(max_examples=40)
@given(st.integers(500, 10**6))
def test_solve_matches_oracle_beyond_the_corpus(seed):
    inst = corpus_instance(seed)
    x = solve(inst)
    assert (x is not None) == brute_gctuf(inst).feasible
    assert x is None or inst.is_solution(x)


def test_window_mode_matches_oracle():
    # the window around an LP vertex is a heuristic; this sweep is its evidence
    for seed in range(150):
        inst = corpus_instance(seed)
        x = solve(inst, "window")
        assert (x is not None) == brute_gctuf(inst).feasible
        assert x is None or inst.is_solution(x)
