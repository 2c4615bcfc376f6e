import math

import numpy as np
import pytest
from conftest import dfas, random_machines
from hypothesis import given, settings

from aec.automata import Dfa, in_degree_profile
from aec.energy import (
    _howard,
    _karp,
    _reachable_graph,
    bits_to_joules,
    energy_complexity,
    energy_curve,
    energy_rate,
    energy_witness,
    expected_step_energy,
    lower_bound_margin,
    margin_terms,
    recurrent_witness,
    restricted_profile,
    run_energy,
    stationary,
    stationary_residual,
    Distribution,
)
from aec.oracles import brute_force_energy
from aec.transforms import cycle_expand, gen_LI, gen_Lbb

LOG3 = math.log2(3)
ROTATION = Dfa(("a", "b"), [[1, 2], [2, 0], [0, 1]], 0, frozenset({0}))


def test_run_energy():
    assert run_energy(gen_Lbb(), "bbb") == pytest.approx(2 * LOG3, abs=1e-12)
    assert run_energy(gen_Lbb(), "") == 0
    assert run_energy(ROTATION, "abbaab") == 0


def test_energy_curve_fig1():
    c = energy_curve(gen_Lbb(), 3, witnesses=True)
    assert c.values == pytest.approx([0, 1, 2, 2 * LOG3], abs=1e-12)
    assert c.witnesses == ((), ("a",), ("a", "a"), ("b", "b", "b"))
    assert c.n_max == 3 and len(c.fingerprint) == 16
    assert energy_witness(gen_Lbb(), 1) == ("a",)


def test_energy_curve_reversible_zero():
    assert energy_curve(ROTATION, 10).values == (0.0,) * 11


@settings(max_examples=150, deadline=None)
@given(dfas(max_states=6, max_symbols=2))
def test_dp_matches_enumeration(d):
    chi_max = in_degree_profile(d).max()
    for n in range(0, 9):
        e = energy_complexity(d, n)
        assert e == pytest.approx(brute_force_energy(d, n), abs=1e-9)
        assert 0 <= e <= n * math.log2(chi_max) + 1e-9
        w = energy_witness(d, n)
        assert len(w) == n and run_energy(d, w) == pytest.approx(e, abs=1e-9)


def test_energy_rate_examples():
    assert energy_rate(gen_Lbb()) == pytest.approx(LOG3, abs=1e-12)
    assert energy_rate(cycle_expand(gen_LI(), 1, 4)) == pytest.approx(0.25)
    assert energy_rate(ROTATION) == 0


def test_karp_and_policy_iteration_agree():
    for d in random_machines(500, 10, 3, seed=31):
        succ, w = _reachable_graph(d)
        assert _howard(succ, w) == pytest.approx(_karp(succ, w), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(dfas(max_states=5, max_symbols=2))
def test_rate_is_limit_slope(d):
    q = len(_reachable_graph(d)[0])
    n = 100 * q
    top = math.log2(in_degree_profile(d).max())
    assert abs(energy_complexity(d, n) / n - energy_rate(d)) <= top * q / n + 1e-9


def test_stationary_fig1():
    dist = stationary(gen_Lbb())
    assert dist.probs == pytest.approx((0, 0, 0.5, 0.5), abs=1e-12)
    assert dist.support() == [2, 3]


def test_stationary_examples():
    assert stationary(ROTATION).probs == pytest.approx((1 / 3,) * 3)
    assert stationary(gen_LI()).probs == pytest.approx((0, 1))


def test_stationary_splits_between_closed_classes():
    # from 0, "a" leads to a sink and "b" to a two-state cycle
    d = Dfa(("a", "b"), [[1, 2], [1, 1], [3, 3], [2, 2]], 0, frozenset())
    assert stationary(d).probs == pytest.approx((0, 0.5, 0.25, 0.25))


@settings(max_examples=150, deadline=None)
@given(dfas(max_states=8, max_symbols=3))
def test_stationary_is_fixed(d):
    dist = stationary(d)
    assert math.fsum(dist.probs) == pytest.approx(1, abs=1e-12)
    assert stationary_residual(d, dist) <= 1e-10
    assert expected_step_energy(d, dist, in_degree_profile(d)) >= expected_step_energy(
        d, dist, restricted_profile(d, dist)) - 1e-12


def test_expected_step_energy_fig1():
    d = gen_Lbb()
    dist = stationary(d)
    assert expected_step_energy(d, dist, in_degree_profile(d)) == pytest.approx((1 + LOG3) / 2, abs=1e-12)
    assert expected_step_energy(d, dist, restricted_profile(d, dist)) == pytest.approx(1.0, abs=1e-12)
    assert expected_step_energy(ROTATION, stationary(ROTATION), in_degree_profile(ROTATION)) == 0


def test_expected_rejects_non_stationary():
    with pytest.raises(ValueError, match="stationary"):
        expected_step_energy(gen_Lbb(), Distribution((1.0, 0, 0, 0)), in_degree_profile(gen_Lbb()))


def test_restricted_profile_fig1():
    d = gen_Lbb()
    psi = restricted_profile(d, stationary(d))
    assert psi.psi(2, "b") == 2 and in_degree_profile(d).chi(2, "b") == 3
    assert psi.psi(3, "a") == 2
    full = restricted_profile(ROTATION, stationary(ROTATION))
    assert (full.counts == in_degree_profile(ROTATION).counts).all()


def test_margin_fig1():
    d = gen_Lbb()
    assert lower_bound_margin(d) == pytest.approx((LOG3 - 1) / 2, abs=1e-12)
    [term] = margin_terms(d)
    assert (term.state, term.symbol, term.chi, term.psi) == (2, "b", 3, 2)
    assert lower_bound_margin(ROTATION) == 0


def test_margin_cycle_expansion():
    # the ring entry is also entered from the transient start, so psi = 1 < chi = 2 there
    f = cycle_expand(gen_LI(), 1, 3)
    assert lower_bound_margin(f) == pytest.approx(1 / 6)
    assert {(t.state, t.symbol) for t in margin_terms(f)} == {(1, "a"), (1, "b")}


def test_recurrent_witness_fig1():
    word, bits = recurrent_witness(gen_Lbb(), 10)
    assert word[:2] == ("b", "b")
    assert bits == pytest.approx(LOG3 + 10 * LOG3)
    assert bits >= (1 + lower_bound_margin(gen_Lbb())) * 10


def test_bits_to_joules():
    assert bits_to_joules(1, 300) == pytest.approx(2.8711e-21, rel=1e-4)
    assert bits_to_joules(0, 5) == 0
    assert bits_to_joules(LOG3, 300) == pytest.approx(LOG3 * bits_to_joules(1, 300))
    with pytest.raises(ValueError):
        bits_to_joules(1, 0)


def test_curve_bound_cycle():
    # one bit on entering the ring, then one every fourth step
    f = cycle_expand(gen_LI(), 1, 4)
    assert np.allclose(energy_curve(f, 9).values, [0, 1, 1, 1, 1, 2, 2, 2, 2, 3])
