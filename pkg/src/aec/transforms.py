"""Language-preserving DFA rewrites that lower forgotten bits, and the language families they are tested on."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .automata import Dfa, DfaError, check_alphabet, minimize

DEFAULT_STATE_CAP = 10**6


@dataclass(frozen=True)
class BagPlan:
    """Copies per minimal state, with the resulting per-bag inflow and slack.

    ``per_symbol_in[i, s]`` counts the ``s``-transitions that enter bag ``i``
    once every source bag contributes one edge per copy. A bag can share its
    inflow so that no copy gets more than ``k + 1`` same-symbol edges exactly
    when its slack is nonnegative.
    """

    bag_sizes: tuple[int, ...]
    per_symbol_in: np.ndarray
    slack: tuple[int, ...]


def bag_plan(d: Dfa, bag_sizes: Sequence[int] | None = None) -> BagPlan:
    n, k = d.state_count, len(d.alphabet)
    mu = np.ones(n, dtype=np.int64) if bag_sizes is None else np.asarray(bag_sizes, dtype=np.int64)
    inflow = np.zeros((n, k), dtype=np.int64)
    for s in range(k):
        np.add.at(inflow[:, s], d.table[:, s], mu)
    slack = mu * (k + 1) - inflow.max(axis=1)
    return BagPlan(tuple(mu.tolist()), inflow, tuple(slack.tolist()))


def _grow_bags(d: Dfa) -> list[int]:
    n, k = d.state_count, len(d.alphabet)
    plan = bag_plan(d)
    u = np.array(plan.slack)
    # Each round raises the slack total by at least one and no slack can climb
    # above max(initial max, k), which bounds the number of rounds.
    cap = n * max(int(u.max()), k) - int(u.sum()) + 1
    mu = np.ones(n, dtype=np.int64)
    inflow = plan.per_symbol_in.copy()
    rounds = 0
    while u.min() < 0:
        if rounds >= cap:
            raise RuntimeError(f"bag growth did not settle within {cap} rounds")
        i = int(np.argmin(u))  # ties go to the lowest bag index
        mu[i] += 1
        inflow[d.table[i], np.arange(k)] += 1
        u = mu * (k + 1) - inflow.max(axis=1)
        rounds += 1
    return mu.tolist()


def spread_bags(d: Dfa, mu: Sequence[int]) -> Dfa:
    """Expand bag ``i`` into ``mu[i]`` copies, dealing incoming edges round-robin."""
    offsets = np.concatenate([[0], np.cumsum(mu)]).tolist()
    k = len(d.alphabet)
    delta = [[0] * k for _ in range(offsets[-1])]
    for s in range(k):
        dealt = [0] * d.state_count
        for j in range(d.state_count):
            t = d.delta[j][s]
            for c in range(mu[j]):
                delta[offsets[j] + c][s] = offsets[t] + dealt[t] % mu[t]
                dealt[t] += 1
    accepting = frozenset(offsets[i] + c for i in d.accepting for c in range(mu[i]))
    return Dfa(d.alphabet, delta, offsets[d.start], accepting)


def rebalance(d: Dfa) -> Dfa:
    """Equivalent DFA whose same-symbol in-degrees never exceed ``|alphabet| + 1``."""
    m = minimize(d)
    return spread_bags(m, _grow_bags(m))


def tree_expand(d: Dfa, k: int, max_states: int = DEFAULT_STATE_CAP) -> Dfa:
    """Buffer ``k`` symbols in a tree below each minimal state before forgetting them.

    State ``(r, w)`` remembers the minimal state ``r`` reached at the last
    root plus the window ``w`` read since. Tree edges are injective; only the
    edge leaving a full window (``len(w) == k``) merges paths, landing on the
    root of the minimal state the whole window leads to.
    """
    if k < 1:
        raise DfaError("tree depth must be at least 1")
    m = minimize(d)
    C, K = m.state_count, len(m.alphabet)
    per_tree = k + 1 if K == 1 else (K ** (k + 1) - 1) // (K - 1)
    if C * per_tree > max_states:
        raise DfaError(f"tree expansion needs {C * per_tree} states, cap is {max_states}")

    index: dict[tuple[int, tuple[int, ...]], int] = {}
    reached: list[int] = []
    for r in range(C):
        for depth in range(k + 1):
            for w in product(range(K), repeat=depth):
                index[r, w] = len(reached)
                q = r
                for s in w:
                    q = m.delta[q][s]
                reached.append(q)

    delta = []
    for (r, w), i in index.items():
        if len(w) < k:
            delta.append([index[r, w + (s,)] for s in range(K)])
        else:
            delta.append([index[m.delta[reached[i]][s], ()] for s in range(K)])
    accepting = frozenset(i for i, q in enumerate(reached) if q in m.accepting)
    return Dfa(m.alphabet, delta, index[m.start, ()], accepting)


def cycle_expand(d: Dfa, q: int, m: int) -> Dfa:
    """Replace the total self-loop state ``q`` by a ring of ``m`` equivalent states.

    ``q`` keeps its index and all outside edges; the ``m - 1`` new states are
    appended. Only the edge closing the ring joins outside edges at ``q``.
    """
    if m < 2:
        raise DfaError("cycle length must be at least 2")
    if not 0 <= q < d.state_count:
        raise DfaError(f"unknown state {q}")
    if any(t != q for t in d.delta[q]):
        raise DfaError(f"state {q} is not a self-loop on every symbol")
    n, k = d.state_count, len(d.alphabet)
    ring = [q] + list(range(n, n + m - 1))
    delta = [list(row) for row in d.delta] + [[0] * k for _ in range(m - 1)]
    for a, b in zip(ring, ring[1:] + ring[:1]):
        delta[a] = [b] * k
    accepting = set(d.accepting)
    if q in accepting:
        accepting.update(ring)
    return Dfa(d.alphabet, delta, d.start, frozenset(accepting))


# -- language families -----------------------------------------------------------

def gen_Lbb() -> Dfa:
    """Words over ``a b`` that contain ``bb`` and end in ``b``."""
    return Dfa(("a", "b"), [[0, 1], [0, 2], [3, 2], [3, 2]], 0, frozenset({2}))


def in_Lbb(word: Sequence[str]) -> bool:
    w = "".join(word)
    return "bb" in w and w.endswith("b")


def gen_LI(alphabet: Sequence[str] = ("a", "b")) -> Dfa:
    """Two-state machine for all non-empty words."""
    alphabet = check_alphabet(alphabet)
    k = len(alphabet)
    return Dfa(alphabet, [[1] * k, [1] * k], 0, frozenset({1}))


def in_LI(word: Sequence[str]) -> bool:
    return len(word) >= 1


def lj_alphabet(j: int) -> tuple[str, ...]:
    return tuple(f"s{i}" for i in range(1, j + 1))


def lj_successor(i: int, j: int) -> int:
    return i % j + 1


def gen_Lj(j: int) -> Dfa:
    """Words over ``s1..sj`` ending in ``s_i s_{i mod j + 1}``; for ``j = 1`` the non-empty words.

    For ``j >= 2`` state 0 is the start bag, ``i`` is the accepting bag for a
    word ending in a matching pair closed by ``s_i``, and ``j + i`` holds
    every other word ending in ``s_i``.
    """
    if j < 1:
        raise DfaError("j must be at least 1")
    if j == 1:
        return gen_LI(lj_alphabet(1))
    delta = [[j + k for k in range(1, j + 1)]]
    last = [None] + list(range(1, j + 1)) * 2
    for q in range(1, 2 * j + 1):
        delta.append([k if lj_successor(last[q], j) == k else j + k for k in range(1, j + 1)])
    return Dfa(lj_alphabet(j), delta, 0, frozenset(range(1, j + 1)))


def in_Lj(j: int, word: Sequence[str]) -> bool:
    if j == 1:
        return len(word) >= 1
    if len(word) < 2:
        return False
    a, b = int(word[-2][1:]), int(word[-1][1:])
    return b == lj_successor(a, j)
