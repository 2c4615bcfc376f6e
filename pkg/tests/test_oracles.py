import math

import numpy as np
import pytest
from conftest import random_machines

from aec.automata import Dfa, equivalent, in_degree_profile, is_reversible_dfa, renumber_canonical, serialize_dfa, validate_dfa
from aec.energy import energy_complexity, expected_step_energy, stationary
from aec.oracles import (
    EnumerationSpec,
    SearchSpaceError,
    brute_force_energy,
    canonical_tables,
    enumerate_dfas,
    find_reversible_recognizer,
    min_inflow_over_recognizers,
    monte_carlo_step_energy,
    random_dfa,
    recognizers,
)
from aec.transforms import gen_LI, gen_Lbb, gen_Lj

PARITY = Dfa(("a",), [[1], [0]], 0, frozenset({0}))


def test_enumeration_counts():
    assert len(list(enumerate_dfas(EnumerationSpec(1, ("a",))))) == 2
    # one-state machines plus two-state tables with 0 -> 1 forced, times four accept sets
    assert len(list(enumerate_dfas(EnumerationSpec(2, ("a",))))) == 2 + 2 * 4


@pytest.mark.parametrize("n, k", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (4, 1)])
def test_canonical_tables_match_raw_count(n, k):
    # canonical tables = reachable tables up to renumbering the non-start states
    spec = EnumerationSpec(n, ("a", "b")[:k], canonical_only=False)
    raw = {serialize_dfa(renumber_canonical(d)) for d in enumerate_dfas(spec) if d.state_count == n}
    canon = [d for d in enumerate_dfas(EnumerationSpec(n, ("a", "b")[:k])) if d.state_count == n]
    assert len(canon) == len(raw) == len({serialize_dfa(d) for d in canon})
    assert len(list(canonical_tables(n, k))) * 2**n == len(canon)


def test_enumerated_machines_are_valid_and_canonical():
    for d in enumerate_dfas(EnumerationSpec(3, ("a", "b"))):
        validate_dfa(d)
        assert renumber_canonical(d) == d


def test_guard():
    with pytest.raises(SearchSpaceError):
        list(enumerate_dfas(EnumerationSpec(6, ("a", "b"))))
    with pytest.raises(ValueError):
        EnumerationSpec(0, ("a",))


def test_min_inflow_examples():
    assert min_inflow_over_recognizers(gen_Lj(1), 5) == 2
    assert min_inflow_over_recognizers(gen_Lbb(), 4) == 3
    assert min_inflow_over_recognizers(PARITY, 3) == 1
    assert min_inflow_over_recognizers(gen_Lj(2), 4) is None


def test_min_inflow_l2_at_five_states():
    assert min_inflow_over_recognizers(gen_Lj(2), 5, limit=2 * 10**9) == 3


def test_min_inflow_nonincreasing_and_threads():
    values = [min_inflow_over_recognizers(gen_Lbb(), m, limit=2 * 10**9) for m in (4, 5)]
    assert values[0] >= values[1] >= 2
    series = [min_inflow_over_recognizers(gen_LI(("a",)), m) for m in range(2, 6)]
    assert all(a >= b for a, b in zip(series, series[1:]))
    assert min_inflow_over_recognizers(gen_LI(("a",)), 5, threads=2) == series[-1]


def test_recognizers_are_equivalent():
    found = list(recognizers(gen_LI(), 3))
    assert found and all(equivalent(d, gen_LI())[0] for d in found)


def test_find_reversible_recognizer():
    found = find_reversible_recognizer(PARITY, 3)
    assert found is not None and is_reversible_dfa(found) and equivalent(found, PARITY)[0]
    assert found.state_count == 2
    assert find_reversible_recognizer(gen_LI(("a",)), 4) is None
    assert find_reversible_recognizer(gen_Lbb(), 4) is None


def test_brute_force_energy():
    assert brute_force_energy(gen_Lbb(), 3) == pytest.approx(2 * math.log2(3))
    assert brute_force_energy(gen_Lbb(), 0) == 0
    with pytest.raises(SearchSpaceError):
        brute_force_energy(gen_Lbb(), 30)


def test_brute_force_matches_dp():
    rng = np.random.default_rng(40)
    for d in random_machines(200, 6, 2, seed=41):
        n = int(rng.integers(0, 9))
        assert energy_complexity(d, n) == pytest.approx(brute_force_energy(d, n), abs=1e-9)


def finite_horizon_expectation(d, n):
    """Exact mean bits per step over uniform words of length n, by propagating the state distribution."""
    k = len(d.alphabet)
    chi = in_degree_profile(d).counts
    bits = np.log2(chi[d.table, np.arange(k)]).mean(axis=1)
    p = np.zeros(d.state_count)
    p[d.start] = 1
    total = 0.0
    for _ in range(n):
        total += p @ bits
        nxt = np.zeros_like(p)
        for s in range(k):
            np.add.at(nxt, d.table[:, s], p / k)
        p = nxt
    return total / n


def test_monte_carlo_fig1():
    d = gen_Lbb()
    mean, se = monte_carlo_step_energy(d, 10**4, 200, seed=0)
    stat = expected_step_energy(d, stationary(d), in_degree_profile(d))
    assert abs(mean - stat) <= 3 * se
    assert abs(mean - finite_horizon_expectation(d, 10**4)) <= 3 * se


def test_monte_carlo_reversible_and_determinism():
    rot = Dfa(("a", "b"), [[1, 2], [2, 0], [0, 1]], 0, frozenset({0}))
    assert monte_carlo_step_energy(rot, 50, 20, seed=3) == (0.0, 0.0)
    assert monte_carlo_step_energy(gen_Lbb(), 100, 50, seed=9) == monte_carlo_step_energy(gen_Lbb(), 100, 50, seed=9)
    with pytest.raises(ValueError):
        monte_carlo_step_energy(gen_Lbb(), 0, 5, seed=0)


def test_random_dfa_reproducible():
    a = random_dfa(np.random.default_rng(1), 5, ("a", "b"))
    b = random_dfa(np.random.default_rng(1), 5, ("a", "b"))
    assert a == b and 1 <= a.state_count <= 5
