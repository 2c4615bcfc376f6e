"""Forgotten-bit accounting for DFAs.

Entering state ``q`` on symbol ``s`` erases ``log2 chi(q, s)`` bits, where
``chi`` counts the ``s``-edges into ``q``. Everything here is built on that
per-step charge: single runs, the worst case over all inputs of a length,
its asymptotic slope, and expectations under uniformly random input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.sparse.csgraph import connected_components

from .automata import Dfa, InDegreeProfile, fingerprint, in_degree_profile, reachable_states, run_trace

STATIONARY_TOL = 1e-9
SUPPORT_TOL = 1e-12


def run_energy(d: Dfa, w) -> float:
    return run_trace(d, w).bits


def _step_bits(d: Dfa) -> np.ndarray:
    """``bits[q, s]``: cost of leaving ``q`` on ``s``."""
    chi = in_degree_profile(d).counts
    k = len(d.alphabet)
    return np.log2(chi[d.table, np.arange(k)])


def _forward_curve(d: Dfa, n_max: int) -> list[float]:
    bits = _step_bits(d)
    best = np.full(d.state_count, -np.inf)
    best[d.start] = 0.0
    values = [0.0]
    for _ in range(n_max):
        nxt = np.full(d.state_count, -np.inf)
        for s in range(len(d.alphabet)):
            np.maximum.at(nxt, d.table[:, s], best + bits[:, s])
        best = nxt
        values.append(float(best.max()))
    return values


def energy_complexity(d: Dfa, n: int) -> float:
    """Most bits forgotten on any input of length exactly ``n``."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    return _forward_curve(d, n)[-1]


def _backward_products(d: Dfa, n: int) -> list[list[int]]:
    """``table[r][q]``: the largest product of in-degrees over ``r``-step runs from ``q``."""
    chi = in_degree_profile(d).counts.tolist()
    k = len(d.alphabet)
    table = [[1] * d.state_count]
    for _ in range(n):
        prev = table[-1]
        table.append([
            max(chi[t][s] * prev[t] for s, t in zip(range(k), row))
            for row in d.delta
        ])
    return table


def _greedy_word(d: Dfa, q: int, r: int, table: list[list[int]]) -> list[str]:
    chi = in_degree_profile(d).counts
    word = []
    for left in range(r, 0, -1):
        target = table[left][q]
        for s, sym in enumerate(d.alphabet):
            t = d.delta[q][s]
            if int(chi[t, s]) * table[left - 1][t] == target:
                word.append(sym)
                q = t
                break
    return word


def energy_witness(d: Dfa, n: int) -> tuple[str, ...]:
    """Lexicographically least length-``n`` word attaining the worst case (exact tie-breaks)."""
    table = _backward_products(d, n)
    return tuple(_greedy_word(d, d.start, n, table))


@dataclass(frozen=True)
class EnergyCurve:
    values: tuple[float, ...]
    fingerprint: str
    n_max: int
    witnesses: tuple[tuple[str, ...], ...] | None = None


def energy_curve(d: Dfa, n_max: int, witnesses: bool = False) -> EnergyCurve:
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    values = tuple(_forward_curve(d, n_max))
    wit = None
    if witnesses:
        table = _backward_products(d, n_max)
        wit = tuple(tuple(_greedy_word(d, d.start, r, table)) for r in range(n_max + 1))
    return EnergyCurve(values, fingerprint(d), n_max, wit)


KARP_LIMIT = 2048
HOWARD_EPS = 1e-12


def _reachable_graph(d: Dfa) -> tuple[np.ndarray, np.ndarray]:
    """Successor positions and edge weights restricted to the reachable states, BFS-numbered."""
    order = reachable_states(d)
    pos = np.full(d.state_count, -1)
    pos[order] = np.arange(len(order))
    succ = pos[d.table[order]]
    weights = _step_bits(d)[order]
    return succ, weights


def _karp(succ: np.ndarray, weights: np.ndarray) -> float:
    m, k = succ.shape
    walks = np.full((m + 1, m), -np.inf)
    walks[0, 0] = 0.0
    src = np.repeat(np.arange(m), k)
    dst, w = succ.ravel(), weights.ravel()
    for j in range(1, m + 1):
        np.maximum.at(walks[j], dst, walks[j - 1, src] + w)
    steps = (m - np.arange(m))[:, None]
    with np.errstate(invalid="ignore"):
        ratios = (walks[m] - walks[:m]) / steps
    ratios[np.isnan(ratios) | (walks[:m] == -np.inf)] = np.inf
    per_node = ratios.min(axis=0)
    return float(per_node[walks[m] > -np.inf].max())


def _policy_values(nxt: np.ndarray, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cycle mean reached from each node and the relative bias, for a fixed successor choice."""
    m = len(nxt)
    eta = np.zeros(m)
    bias = np.zeros(m)
    color = np.zeros(m, dtype=np.int8)  # 0 new, 1 on current walk, 2 done
    for v in range(m):
        path = []
        u = v
        while color[u] == 0:
            color[u] = 1
            path.append(u)
            u = int(nxt[u])
        closes_cycle = color[u] == 1
        color[path] = 2
        if closes_cycle:
            cyc = path[path.index(u):]
            mean = float(np.mean(cost[cyc]))
            bias[u] = 0.0
            eta[u] = mean
            for c in reversed(cyc[1:]):
                eta[c] = mean
                bias[c] = cost[c] - mean + bias[nxt[c]]
            path = path[:path.index(u)]
        for c in reversed(path):
            eta[c] = eta[nxt[c]]
            bias[c] = cost[c] - eta[c] + bias[nxt[c]]
    return eta, bias


def _howard(succ: np.ndarray, weights: np.ndarray, max_rounds: int = 10_000) -> float:
    """Policy iteration for the maximum cycle mean; linear memory, for machines too big for Karp."""
    m = len(succ)
    rows = np.arange(m)
    policy = weights.argmax(axis=1)
    for _ in range(max_rounds):
        eta, bias = _policy_values(succ[rows, policy], weights[rows, policy])
        reach = eta[succ]
        better = reach.max(axis=1) > eta + HOWARD_EPS
        if better.any():
            policy[better] = reach[better].argmax(axis=1)
            continue
        score = np.where(np.abs(reach - eta[:, None]) <= HOWARD_EPS, weights - eta[:, None] + bias[succ], -np.inf)
        better = score.max(axis=1) > bias + HOWARD_EPS
        if not better.any():
            return float(eta.max())
        policy[better] = score[better].argmax(axis=1)
    raise RuntimeError(f"policy iteration did not settle within {max_rounds} rounds")


def energy_rate(d: Dfa) -> float:
    """Maximum mean edge weight over cycles reachable from start.

    Karp's algorithm up to ``KARP_LIMIT`` reachable states, policy iteration above.
    """
    succ, weights = _reachable_graph(d)
    if len(succ) <= KARP_LIMIT:
        return _karp(succ, weights)
    return _howard(succ, weights)


# -- random-input analysis ---------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    probs: tuple[float, ...]

    def support(self, tol: float = SUPPORT_TOL) -> list[int]:
        return [q for q, p in enumerate(self.probs) if p > tol]


@dataclass(frozen=True)
class RestrictedProfile:
    """Same-symbol in-degrees counting only sources with positive stationary mass."""

    alphabet: tuple[str, ...]
    counts: np.ndarray

    def psi(self, q: int, symbol: str) -> int:
        return int(self.counts[q, self.alphabet.index(symbol)])


def transition_matrix(d: Dfa) -> np.ndarray:
    """Row-stochastic chain of ``d`` driven by uniform symbols."""
    n, k = d.state_count, len(d.alphabet)
    P = np.zeros((n, n))
    for s in range(k):
        np.add.at(P, (np.arange(n), d.table[:, s]), 1.0 / k)
    return P


def stationary(d: Dfa) -> Distribution:
    """Long-run average state occupancy from start under uniform random input.

    Closed communicating classes are found from the condensation of the
    reachable chain. Each contributes its own stationary vector weighted by
    the probability of being absorbed into it from start.
    """
    n = d.state_count
    order = reachable_states(d)
    P = transition_matrix(d)[np.ix_(order, order)]
    _, labels = connected_components(P > 0, directed=True, connection="strong")
    m = len(order)
    closed = []
    for c in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == c)
        leaving = P[np.ix_(members, np.flatnonzero(labels != c))]
        if not leaving.any():
            closed.append(members)

    in_closed = np.zeros(m, dtype=bool)
    for members in closed:
        in_closed[members] = True
    transient = np.flatnonzero(~in_closed)

    if in_closed[0]:
        weights = [1.0 if 0 in members else 0.0 for members in closed]
    else:
        start_row = int(np.flatnonzero(transient == 0)[0])
        A = np.eye(len(transient)) - P[np.ix_(transient, transient)]
        B = np.stack([P[np.ix_(transient, members)].sum(axis=1) for members in closed], axis=1)
        weights = np.linalg.solve(A, B)[start_row].tolist()

    pi = np.zeros(m)
    for members, weight in zip(closed, weights):
        if weight == 0.0:
            continue
        Q = P[np.ix_(members, members)]
        A = Q.T - np.eye(len(members))
        A[-1, :] = 1.0
        b = np.zeros(len(members))
        b[-1] = 1.0
        pi[members] += weight * np.linalg.solve(A, b)

    probs = np.zeros(n)
    probs[order] = np.clip(pi, 0.0, None)
    probs /= probs.sum()
    return Distribution(tuple(probs.tolist()))


def stationary_residual(d: Dfa, dist: Distribution) -> float:
    pi = np.array(dist.probs)
    return float(np.abs(pi @ transition_matrix(d) - pi).max())


def restricted_profile(d: Dfa, dist: Distribution) -> RestrictedProfile:
    k = len(d.alphabet)
    counts = np.zeros((d.state_count, k), dtype=np.int64)
    live = np.array(dist.probs) > SUPPORT_TOL
    for s in range(k):
        np.add.at(counts[:, s], d.table[live, s], 1)
    counts.flags.writeable = False
    return RestrictedProfile(d.alphabet, counts)


def expected_step_energy(d: Dfa, dist: Distribution, profile: InDegreeProfile | RestrictedProfile) -> float:
    """Mean bits charged per step when the current state is drawn from ``dist``."""
    residual = stationary_residual(d, dist)
    if residual > STATIONARY_TOL:
        raise ValueError(f"distribution is not stationary (residual {residual:.3g})")
    k = len(d.alphabet)
    terms = []
    for q in dist.support():
        for s in range(k):
            terms.append(dist.probs[q] / k * math.log2(profile.counts[d.delta[q][s], s]))
    return math.fsum(terms)


@dataclass(frozen=True)
class MarginTerm:
    state: int
    symbol: str
    probability: float
    chi: int
    psi: int

    @property
    def value(self) -> float:
        return self.probability * (math.log2(self.chi) - math.log2(self.psi))


def margin_terms(d: Dfa) -> list[MarginTerm]:
    """Stationary (state, symbol) entries whose positive-mass inflow is below the full in-degree."""
    dist = stationary(d)
    chi = in_degree_profile(d).counts
    psi = restricted_profile(d, dist).counts
    k = len(d.alphabet)
    enter = np.zeros((d.state_count, k))
    for q in dist.support():
        for s in range(k):
            enter[d.delta[q][s], s] += dist.probs[q] / k
    return [
        MarginTerm(q, d.alphabet[s], float(enter[q, s]), int(chi[q, s]), int(psi[q, s]))
        for q in range(d.state_count)
        for s in range(k)
        if enter[q, s] > SUPPORT_TOL and psi[q, s] < chi[q, s]
    ]


def lower_bound_margin(d: Dfa) -> float:
    terms = margin_terms(d)
    return max((t.value for t in terms), default=0.0)


def recurrent_witness(d: Dfa, n: int) -> tuple[tuple[str, ...], float]:
    """Reach the best stationary state by a shortest path, then run its costliest ``n`` steps.

    Returns the whole word and the bits it forgets from start.
    """
    dist = stationary(d)
    table = _backward_products(d, n)
    u0 = max(dist.support(), key=lambda q: (table[n][q], -q))
    parent: dict[int, tuple[int, str] | None] = {d.start: None}
    for q in reachable_states(d):
        for s, t in zip(d.alphabet, d.delta[q]):
            parent.setdefault(t, (q, s))
    prefix = []
    q = u0
    while parent[q] is not None and q != d.start:
        q, s = parent[q]
        prefix.append(s)
    word = tuple(reversed(prefix)) + tuple(_greedy_word(d, u0, n, table))
    return word, run_trace(d, word).bits


BOLTZMANN = constants.Boltzmann


def bits_to_joules(bits: float, temperature_kelvin: float) -> float:
    if temperature_kelvin <= 0:
        raise ValueError("temperature must be positive")
    if bits < 0:
        raise ValueError("bits must be nonnegative")
    return bits * BOLTZMANN * temperature_kelvin * math.log(2)
