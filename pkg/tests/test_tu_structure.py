from __future__ import annotations

import random

from gctuf.exact_linalg import identity, is_totally_unimodular
from gctuf.generators import core_derived, pivoted_matrix, random_network, random_transposed, three_sum_matrix
from gctuf.tu_structure import (
    CORES,
    CoreLeaf,
    NetworkLeaf,
    PivotNode,
    ThreeSumNode,
    TransposedNetworkLeaf,
    compose_three_sum,
    decompose,
    find_three_sum,
    network_matrix,
    pivot,
    recognize_core,
    recognize_network,
    recompose,
    replay_core,
    tree_from_text,
    tree_to_text,
    verify_tree,
)


def test_pivot_examples():
    assert pivot([[1, 1], [1, 0]], 0, 0) == [[-1, 1], [1, -1]]
    assert pivot([[1]], 0, 0) == [[-1]]


def test_double_pivot_negates_row_and_column():
    rng = random.Random(5)
    for seed in range(60):
        T = three_sum_matrix(seed, 3, 3)
        i, j = rng.choice([(i, j) for i, r in enumerate(T) for j, v in enumerate(r) if v])
        twice = pivot(pivot(T, i, j), i, j)
        for r in range(len(T)):
            for c in range(len(T[0])):
                sign = -1 if (r == i) != (c == j) else 1
                assert twice[r][c] == sign * T[r][c]


def test_pivot_keeps_tu():
    rng = random.Random(8)
    for seed in range(60):
        T = three_sum_matrix(seed, 3, 3)
        i, j = rng.choice([(i, j) for i, r in enumerate(T) for j, v in enumerate(r) if v])
        assert is_totally_unimodular(pivot(T, i, j))


def test_recognize_network_examples():
    real = recognize_network([[1], [1]])
    assert real is not None and real.derive() == [[1], [1]]
    assert recognize_network(identity(3)) is not None
    assert recognize_network([[1, 1], [1, -1]]) is None


def test_realizations_rederive():
    for seed in range(80):
        N, real = random_network(seed, 5, 4)
        assert real.derive() == N
        found = recognize_network(N)
        assert found is not None and found.derive() == N


def test_recognize_core_examples():
    cid, trace = recognize_core(CORES[1])
    assert cid == 1 and replay_core(cid, trace) == [list(r) for r in CORES[1]]
    with_unit = [list(r) for r in CORES[1]] + [[1, 0, 0, 0, 0]]
    cid, trace = recognize_core(with_unit)
    assert cid == 1 and sum(1 for op in trace if op[0] == "del_row") == 1
    assert recognize_core(identity(5)) is None


def test_core_derived_recognized():
    for seed in range(40):
        M = core_derived(seed)
        hit = recognize_core(M)
        assert hit is not None and replay_core(*hit) == M


def test_find_three_sum_examples():
    N1, _ = random_network(1, 3, 2)
    N2, _ = random_network(2, 3, 2)
    D = [r + [0, 0] for r in N1] + [[0, 0] + r for r in N2]
    node = find_three_sum(D)
    assert node is not None
    assert all(v == 0 for v in node.e + node.f) or all(v == 0 for v in node.g + node.h)
    assert find_three_sum(CORES[1]) is None


def test_find_three_sum_on_compositions():
    for seed in range(40):
        T = three_sum_matrix(seed, 3, 3)
        node = find_three_sum(T)
        assert node is not None
        assert recompose_blocks_ok(T, node)


def recompose_blocks_ok(T, node):
    MA, MB = node.parts(T)
    return compose_three_sum(MA, MB) == [[T[i][j] for j in node.cols_A + node.cols_B] for i in node.rows_A + node.rows_B]


def test_decompose_examples():
    N, _ = random_network(3, 5, 4)
    assert isinstance(decompose(N), NetworkLeaf)
    N1, _ = random_network(4, 4, 3)
    N2, _ = random_network(5, 4, 3)
    D = [r + [0] * 3 for r in N1] + [[0] * 3 + r for r in N2]
    tree = decompose(D)
    assert verify_tree(D, tree)
    assert isinstance(decompose(CORES[2]), CoreLeaf)


def test_decompose_recompose_roundtrip():
    kinds = (three_sum_matrix, pivoted_matrix, lambda s: random_network(s, 5, 4)[0], lambda s: random_transposed(s, 5, 4)[0], core_derived)
    for seed in range(200):
        T = kinds[seed % len(kinds)](seed)
        tree = decompose(T)
        assert verify_tree(T, tree)
        assert recompose(tree) == [list(r) for r in T]
        assert isinstance(tree, (NetworkLeaf, TransposedNetworkLeaf, CoreLeaf, PivotNode, ThreeSumNode))


def test_tree_text_roundtrip():
    for seed in range(40):
        T = pivoted_matrix(seed)
        tree = decompose(T)
        again = tree_from_text(tree_to_text(tree))
        assert tree_to_text(again) == tree_to_text(tree)
        assert verify_tree(T, again)


def test_network_matrix_path_rule():
    # tree 0 -> 1 -> 2, non-tree arc 0 -> 2 uses both tree arcs forwards
    assert network_matrix(3, [(0, 1), (1, 2)], [(0, 2), (2, 0)]) == [[1, -1], [1, -1]]
