from __future__ import annotations

import random

from hypothesis import given
from hypothesis import strategies as st

from gctuf.base_network import (
    CirculationInstance,
    LengthEncoding,
    gcc_to_xlc_lengths,
    gctuf_network_to_gcc,
    solve_gcc,
    solve_network_gctuf,
    solve_xlc,
)
from gctuf.generators import planted_instance, random_gcc
from gctuf.groups import AbelianGroup, TargetSet
from gctuf.instances import GctufInstance
from gctuf.oracle import all_circulations, brute_gcc, brute_gctuf

Z2 = AbelianGroup((2,))


def test_length_encoding_example():
    enc = LengthEncoding(2, 3, (2,))
    assert enc.encode_arc(1, Z2.element(1)) == 13


def test_zero_labels_keep_scaled_lengths():
    G = AbelianGroup((3,))
    gcc = CirculationInstance(2, ((0, 1), (1, 0)), (2, 2), (2, 5), (G.zero, G.zero), G.zero, G)
    enc, lt = gcc_to_xlc_lengths(gcc)
    assert lt == (2 * enc.base, 5 * enc.base)
    for f in all_circulations(2, gcc.arcs, gcc.caps):
        assert enc.decode(sum(a * x for a, x in zip(lt, f)))[0] == gcc.length(f)


def test_xlc_examples():
    cyc = ((0, 1), (1, 0))
    assert solve_xlc(2, cyc, (1, 1), (2, 3), 5) == (1, 1)
    assert solve_xlc(2, cyc, (1, 1), (2, 3), 0) == (0, 0)
    assert solve_xlc(2, cyc, (1, 1), (2, 3), 4) is None


def test_gcc_examples():
    cyc = ((0, 1), (1, 0))
    one = CirculationInstance(2, cyc, (1, 1), (0, 0), (Z2.element(1), Z2.zero), Z2.element(1), Z2)
    assert solve_gcc(one) == (1, 1)
    zero = CirculationInstance(2, cyc, (1, 1), (1, 2), (Z2.element(1), Z2.zero), Z2.zero, Z2)
    assert solve_gcc(zero) == (0, 0)
    none = CirculationInstance(2, cyc, (1, 1), (0, 0), (Z2.zero, Z2.zero), Z2.element(1), Z2)
    assert solve_gcc(none) is None and not brute_gcc(none).feasible


@given(st.integers(0, 10**6))
def test_solve_gcc_matches_enumeration(seed):
    gcc = random_gcc(seed)
    ref = brute_gcc(gcc)
    f = solve_gcc(gcc)
    assert (f is not None) == ref.feasible
    if f is not None:
        assert gcc.is_circulation(f) and gcc.is_feasible(f)
        assert gcc.length(f) == ref.length


def test_network_instances_match_oracle():
    for seed in range(150):
        gen = planted_instance(seed, "network", random.Random(seed).randint(2, 5))
        inst = gen.instance
        x = solve_network_gctuf(inst, gen.realization)
        assert x is not None and inst.is_solution(x)
        # a target set that excludes the planted value may or may not be reachable
        other = inst.with_targets(TargetSet(inst.G, frozenset(inst.G.elements()) - {inst.group_value(gen.planted)}))
        if len(other.R):
            y = solve_network_gctuf(other, gen.realization)
            assert (y is not None) == brute_gctuf(other).feasible
            assert y is None or other.is_solution(y)


def test_network_to_gcc_trivial_group_and_infeasible():
    gen = planted_instance(3, "network", 3)
    inst = gen.instance
    G1 = AbelianGroup(())
    triv = GctufInstance(inst.T, inst.b, G1, [G1.zero] * inst.n, TargetSet.full(G1))
    gcc, mapping = gctuf_network_to_gcc(triv, gen.realization)
    f = solve_gcc(gcc)
    assert f is not None and triv.is_solution(mapping.to_x(f))
    bad = inst.with_rhs([v - 100 for v in inst.b])
    assert gctuf_network_to_gcc(bad.with_targets(TargetSet.of(inst.G, [next(iter(inst.R))])), gen.realization) is None


def test_network_to_gcc_maps_planted_point():
    for seed in range(60):
        gen = planted_instance(seed, "network", 3)
        inst = gen.instance
        r = inst.group_value(gen.planted)
        gcc, mapping = gctuf_network_to_gcc(inst, gen.realization, r)
        f = solve_gcc(gcc)
        assert f is not None
        x = mapping.to_x(f)
        assert inst.satisfies_system(x) and inst.group_value(x) == r
