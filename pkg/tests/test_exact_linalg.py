from __future__ import annotations

import itertools
import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from gctuf.exact_linalg import (
    delta_modularity,
    determinant,
    identity,
    integer_vertex,
    inverse,
    is_totally_unimodular,
    lp_bounds,
    lp_feasible,
    lp_feasible_vertex,
    matmul,
    rank,
    smith_normal_form,
    tu_check,
)
from gctuf.generators import random_network
from gctuf.tu_structure import CORES


def perm_det(M):
    """Leibniz expansion, the determinant oracle."""
    n = len(M)
    total = 0
    for p in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        prod = 1
        for i in range(n):
            prod *= M[i][p[i]]
        total += -prod if inv % 2 else prod
    return total


def test_determinant_examples():
    assert determinant(identity(3)) == 1
    assert determinant([[1, 1], [1, -1]]) == -2
    assert determinant(CORES[1]) in (-1, 0, 1)


square = st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n))


@given(square)
def test_determinant_matches_leibniz(M):
    assert determinant(M) == perm_det(M)


def test_snf_examples():
    assert smith_normal_form([[2, 0], [0, 3]]).diagonal() == [1, 6]
    assert smith_normal_form(identity(3)).diagonal() == [1, 1, 1]
    assert smith_normal_form([[1, 1], [1, 1]]).diagonal() == [1, 0]


matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda kn: st.lists(st.lists(st.integers(-9, 9), min_size=kn[1], max_size=kn[1]), min_size=kn[0], max_size=kn[0])
)


@given(matrices)
def test_snf_reconstructs(M):
    r = smith_normal_form(M)
    assert matmul(matmul(r.S, r.D), r.U) == M
    assert matmul(r.S, r.S_inv) == identity(len(M))
    assert matmul(r.U, r.U_inv) == identity(len(M[0]))
    d = r.diagonal()
    assert sum(1 for x in d if x) == rank(M)
    for a, b in zip(d, d[1:]):
        assert (b % a == 0) if a else b == 0


small = st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(
    lambda kn: st.lists(st.lists(st.integers(-6, 6), min_size=kn[1], max_size=kn[1]), min_size=kn[0], max_size=kn[0])
)


@given(small)
def test_snf_matches_determinantal_divisors(M):
    # d_1 ... d_j equals the gcd of all j x j minors, computed with the Leibniz oracle
    from math import gcd

    k, n = len(M), len(M[0])
    diag = smith_normal_form(M).diagonal()
    prod = 1
    for j in range(1, min(k, n) + 1):
        g = 0
        for rows in itertools.combinations(range(k), j):
            for cols in itertools.combinations(range(n), j):
                g = gcd(g, perm_det([[M[r][c] for c in cols] for r in rows]))
        prod *= diag[j - 1]
        assert prod == g


def test_tu_examples():
    assert is_totally_unimodular(CORES[1]) and is_totally_unimodular(CORES[2])
    assert not is_totally_unimodular([[2]])
    for seed in range(30):
        N, _ = random_network(seed, 5, 5)
        assert is_totally_unimodular(N)


def test_tu_witness_is_a_bad_minor():
    rng = random.Random(4)
    for _ in range(200):
        M = [[rng.choice((-1, 0, 0, 1)) for _ in range(4)] for _ in range(4)]
        rep = tu_check(M)
        brute = all(abs(determinant([[M[i][j] for j in cs] for i in rs])) <= 1 for s in range(1, 5) for rs in itertools.combinations(range(4), s) for cs in itertools.combinations(range(4), s))
        assert rep.is_tu == brute
        if not rep.is_tu:
            rs, cs = rep.witness
            assert abs(determinant([[M[i][j] for j in cs] for i in rs])) > 1


def test_tu_probabilistic_mode_is_labelled():
    N, _ = random_network(1, 12, 11)
    assert tu_check(N, cap=3).mode == "probabilistic"


def test_delta_modularity_examples():
    assert delta_modularity([[1, 0], [0, 1], [1, 1]]) == (1, True)
    assert delta_modularity([[1, 1], [1, -1], [-1, -1]]) == (2, True)
    assert delta_modularity([[1, 0], [0, 1], [1, 2]]) == (2, False)


def test_delta_modularity_of_tu_is_one():
    for seed in range(40):
        N, _ = random_network(seed, 4, 3)
        A = N + identity(3)
        assert delta_modularity(A) == (1, True)


def test_lp_examples():
    assert lp_feasible_vertex(identity(2), [0, 0]) is not None
    assert lp_feasible_vertex([[1], [-1]], [0, -1]) is None
    assert not lp_feasible([[1], [-1]], [0, -1])
    assert lp_bounds([[1], [-1]], [3, 1], [1]) == (Fraction(-1), Fraction(3))
    assert lp_bounds([[1]], [3], [1]) == (None, Fraction(3))


def test_inverse_roundtrip():
    H = [[2, 1], [1, 1]]
    assert matmul(H, inverse(H)) == identity(2)


def test_tu_vertices_are_integral():
    rng = random.Random(2)
    for seed in range(100):
        N, _ = random_network(seed, rng.randint(2, 5), rng.randint(1, 4))
        n = len(N[0])
        T = N + identity(n) + [[-v for v in r] for r in identity(n)]
        xs = [rng.randint(-2, 2) for _ in range(n)]
        b = [sum(a * v for a, v in zip(r, xs)) + rng.randint(0, 2) for r in T]
        x = lp_feasible_vertex(T, b)
        assert x is not None and all(Fraction(v).denominator == 1 for v in x)
        y = integer_vertex(T, b)
        assert y is not None and all(sum(a * v for a, v in zip(r, y)) <= bi for r, bi in zip(T, b))
