import math
from itertools import product

import pytest
from conftest import dfas
from hypothesis import given, settings
from hypothesis import strategies as st

from aec.automata import Dfa, DfaError, accepts, equivalent, in_degree_profile, is_reversible_dfa, minimize
from aec.energy import energy_complexity, energy_curve, energy_rate
from aec.transforms import (
    bag_plan,
    cycle_expand,
    gen_LI,
    gen_Lbb,
    gen_Lj,
    in_Lbb,
    in_Lj,
    lj_alphabet,
    rebalance,
    spread_bags,
    tree_expand,
)


def all_words(alphabet, max_len):
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)


def test_bag_plan_fig1_slacks():
    assert bag_plan(gen_Lbb()).slack == (1, 2, 0, 1)


def test_rebalance_examples():
    assert rebalance(gen_Lbb()) == gen_Lbb()
    assert rebalance(gen_Lj(1)) == gen_Lj(1)
    parity = Dfa(("a",), [[1], [0]], 0, frozenset({0}))
    assert rebalance(parity) == parity


def test_rebalance_splits_heavy_bag():
    # every state jumps to 0 on "a": in-degree 5 exceeds |alphabet|+1 = 3
    d = Dfa(("a", "b"), [[0, 1], [0, 2], [0, 3], [0, 4], [0, 0]], 0, frozenset({4}))
    r = rebalance(d)
    assert in_degree_profile(d).max() == 5
    assert in_degree_profile(r).max() <= 3
    assert equivalent(d, r)[0]
    assert r.state_count > minimize(d).state_count


def test_spread_bags_start_is_copy_zero():
    d = gen_LI(("a",))
    s = spread_bags(d, [2, 3])
    assert s.start == 0 and s.state_count == 5
    assert equivalent(d, s)[0]


def test_tree_expand_fig1_depth3():
    e = tree_expand(gen_Lbb(), 3)
    assert e.state_count == 4 * 15
    assert equivalent(e, gen_Lbb())[0]
    assert energy_complexity(e, 12) <= 15 + 1e-9
    assert all(v <= 5 * (n // 4) + 1e-9 for n, v in enumerate(energy_curve(e, 12).values))


def test_tree_expand_errors():
    with pytest.raises(DfaError):
        tree_expand(gen_Lbb(), 0)
    with pytest.raises(DfaError, match="cap"):
        tree_expand(gen_Lbb(), 10, max_states=1000)


def test_tree_expand_only_roots_merge():
    k = 2
    e = tree_expand(gen_Lbb(), k)
    per_tree = 2 ** (k + 1) - 1
    roots = {i * per_tree for i in range(4)}
    counts = in_degree_profile(e).counts
    for q in range(e.state_count):
        if q not in roots:
            assert counts[q].max() <= 1


def test_tree_expand_epsilon():
    d = gen_Lbb()
    for k in (3, 7, 15):
        assert energy_rate(tree_expand(d, k)) <= 1 + math.log2(4) / (k + 1) + 1e-9


def test_cycle_expand_fig8():
    f = cycle_expand(gen_LI(), 1, 3)
    assert f.state_count == 4
    assert equivalent(f, gen_LI())[0]
    assert energy_complexity(f, 7) == pytest.approx(3.0)
    assert energy_rate(f) == pytest.approx(1 / 3)
    assert energy_rate(cycle_expand(gen_LI(), 1, 10)) == pytest.approx(0.1)


def test_cycle_expand_errors():
    with pytest.raises(DfaError):
        cycle_expand(gen_LI(), 1, 1)
    with pytest.raises(DfaError, match="self-loop"):
        cycle_expand(gen_LI(), 0, 3)


def test_gen_Lbb():
    d = gen_Lbb()
    assert minimize(d).state_count == 4
    for w in all_words("ab", 8):
        assert accepts(d, w) == in_Lbb(w)


def test_gen_LI():
    for alphabet in (("a",), ("a", "b", "c")):
        d = gen_LI(alphabet)
        assert not accepts(d, "")
        assert all(accepts(d, (s,)) for s in alphabet)
        assert all(in_degree_profile(d).chi(1, s) == 2 for s in alphabet)


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_gen_Lj_language(j):
    d = gen_Lj(j)
    for w in all_words(lj_alphabet(j), 6 if j < 4 else 4):
        assert accepts(d, w) == in_Lj(j, w)
    # the minimal recognizer already needs j+1 same-symbol edges somewhere
    assert in_degree_profile(minimize(d)).max() >= j + 1


def test_gen_Lj_examples():
    d = gen_Lj(2)
    assert d.state_count == 5
    assert accepts(d, ("s2", "s1"))
    assert in_degree_profile(d).chi(2 + 1, "s1") == 3
    with pytest.raises(DfaError):
        gen_Lj(0)


@settings(max_examples=200, deadline=None)
@given(dfas(max_states=8, max_symbols=3))
def test_rebalance_property(d):
    r = rebalance(d)
    assert equivalent(d, r)[0]
    assert in_degree_profile(r).max() <= len(d.alphabet) + 1


@settings(max_examples=60, deadline=None)
@given(dfas(max_states=5, max_symbols=2), st.integers(1, 3))
def test_tree_expand_property(d, k):
    e = tree_expand(d, k)
    assert equivalent(d, e)[0]
    m = minimize(d)
    bound = math.log2(len(d.alphabet)) + math.log2(m.state_count) / (k + 1)
    assert energy_rate(e) <= bound + 1e-9


@settings(max_examples=60, deadline=None)
@given(dfas(max_states=6, max_symbols=2), st.integers(2, 5))
def test_cycle_expand_property(d, m):
    loops = [q for q in range(d.state_count) if all(t == q for t in d.delta[q])]
    if loops:
        assert equivalent(d, cycle_expand(d, loops[0], m))[0]


def test_reversible_rebalance_unchanged():
    d = Dfa(("a", "b"), [[1, 2], [2, 0], [0, 1]], 0, frozenset({1}))
    assert is_reversible_dfa(d)
    assert rebalance(d) == minimize(d)
