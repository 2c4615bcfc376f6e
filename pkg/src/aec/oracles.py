"""Brute-force ground truth: exhaustive DFA enumeration, word enumeration, and sampling.

Everything here is deliberately naive so it can check the faster code paths.
Answers about "all recognizers" only hold up to the state bound searched.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .automata import Dfa, check_alphabet, in_degree_profile, minimize

DEFAULT_CANDIDATE_LIMIT = 10**9
WORD_LIMIT = 10**7


class SearchSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class EnumerationSpec:
    max_states: int
    alphabet: tuple[str, ...]
    reachable_only: bool = True
    canonical_only: bool = True

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        if self.canonical_only and not self.reachable_only:
            raise ValueError("canonical forms are only defined for reachable machines")


def candidate_bound(max_states: int, k: int) -> int:
    n = max_states
    return n ** (n * k) * 2**n * n


def _guard(max_states: int, k: int, limit: int) -> None:
    bound = candidate_bound(max_states, k)
    if bound > limit:
        raise SearchSpaceError(f"search space bound {bound:.3g} exceeds limit {limit:.3g}")


def canonical_tables(n: int, k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Transition tables on ``n`` states, all reachable from 0, numbered in BFS order.

    Filling cells row by row, a cell may point at any state seen so far or
    at the next unseen one; this reproduces exactly the BFS numbering, so
    each start-preserving isomorphism class appears once.
    """
    cells = n * k
    flat = [0] * cells

    def fill(pos: int, seen: int):
        if pos == cells:
            if seen == n:
                yield tuple(tuple(flat[q * k:(q + 1) * k]) for q in range(n))
            return
        if pos // k >= seen or cells - pos < n - seen:
            return
        for t in range(min(seen + 1, n)):
            flat[pos] = t
            yield from fill(pos + 1, seen + (t == seen))

    yield from fill(0, 1)


def _raw_tables(n: int, k: int, reachable_only: bool):
    for flat in product(range(n), repeat=n * k):
        table = tuple(tuple(flat[q * k:(q + 1) * k]) for q in range(n))
        if reachable_only:
            seen, stack = {0}, [0]
            while stack:
                for t in table[stack.pop()]:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
            if len(seen) < n:
                continue
        yield table


def enumerate_dfas(spec: EnumerationSpec, limit: int = DEFAULT_CANDIDATE_LIMIT) -> Iterator[Dfa]:
    """Every machine with 1..max_states states and start 0, by state count, then table, then accept mask."""
    k = len(spec.alphabet)
    _guard(spec.max_states, k, limit)
    for n in range(1, spec.max_states + 1):
        tables = canonical_tables(n, k) if spec.canonical_only else _raw_tables(n, k, spec.reachable_only)
        for table in tables:
            for mask in range(2**n):
                yield Dfa(spec.alphabet, table, 0, frozenset(q for q in range(n) if mask >> q & 1))


def _forced_accepting(table, target: Dfa) -> frozenset[int] | None:
    """The only accept set making ``table`` recognize ``target``'s language, if any."""
    label: dict[int, bool] = {}
    seen = {(0, target.start)}
    stack = [(0, target.start)]
    while stack:
        q, r = stack.pop()
        acc = r in target.accepting
        if label.setdefault(q, acc) != acc:
            return None
        for t, u in zip(table[q], target.delta[r]):
            if (t, u) not in seen:
                seen.add((t, u))
                stack.append((t, u))
    return frozenset(q for q, acc in label.items() if acc)


def _recognizers_with(target: Dfa, n: int) -> Iterator[Dfa]:
    for table in canonical_tables(n, len(target.alphabet)):
        accepting = _forced_accepting(table, target)
        if accepting is not None:
            yield Dfa(target.alphabet, table, 0, accepting)


def recognizers(target: Dfa, max_states: int, limit: int = DEFAULT_CANDIDATE_LIMIT) -> Iterator[Dfa]:
    """Every reachable DFA (up to renumbering) with at most ``max_states`` states recognizing L(target)."""
    _guard(max_states, len(target.alphabet), limit)
    t = minimize(target)
    for n in range(t.state_count, max_states + 1):
        yield from _recognizers_with(t, n)


def _min_inflow_at(args) -> int | None:
    target, n = args
    return min((in_degree_profile(d).max() for d in _recognizers_with(target, n)), default=None)


def min_inflow_over_recognizers(
    target: Dfa, max_states: int, limit: int = DEFAULT_CANDIDATE_LIMIT, threads: int = 1
) -> int | None:
    """Smallest worst-case same-symbol in-degree over recognizers with at most ``max_states`` states.

    ``None`` when no recognizer fits in the bound.
    """
    _guard(max_states, len(target.alphabet), limit)
    t = minimize(target)
    jobs = [(t, n) for n in range(t.state_count, max_states + 1)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_min_inflow_at, jobs))
    else:
        results = [_min_inflow_at(job) for job in jobs]
    found = [r for r in results if r is not None]
    return min(found) if found else None


def find_reversible_recognizer(target: Dfa, max_states: int, limit: int = DEFAULT_CANDIDATE_LIMIT) -> Dfa | None:
    for d in recognizers(target, max_states, limit):
        if in_degree_profile(d).max() <= 1:
            return d
    return None


def brute_force_energy(d: Dfa, n: int) -> float:
    """Worst forgotten bits over every word of length ``n``, by enumeration."""
    k = len(d.alphabet)
    if k**n > WORD_LIMIT:
        raise SearchSpaceError(f"{k}^{n} words exceeds limit {WORD_LIMIT}")
    chi = in_degree_profile(d).counts
    best = 0.0
    for word in product(range(k), repeat=n):
        q = d.start
        bits = []
        for s in word:
            q = d.delta[q][s]
            bits.append(math.log2(chi[q, s]))
        best = max(best, math.fsum(bits))
    return best


def monte_carlo_step_energy(d: Dfa, n: int, samples: int, seed: int) -> tuple[float, float]:
    """Mean forgotten bits per step over uniformly random words, with its standard error.

    Words come from NumPy's PCG64 generator seeded with ``seed``.
    """
    if samples < 1 or n < 1:
        raise ValueError("need at least one sample of positive length")
    k = len(d.alphabet)
    rng = np.random.Generator(np.random.PCG64(seed))
    symbols = rng.integers(0, k, size=(n, samples))
    chi = in_degree_profile(d).counts
    bits = np.log2(chi[d.table, np.arange(k)])
    q = np.full(samples, d.start)
    total = np.zeros(samples)
    for s in symbols:
        total += bits[q, s]
        q = d.table[q, s]
    per_step = total / n
    stderr = float(per_step.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return float(per_step.mean()), stderr


def random_dfa(rng: np.random.Generator, max_states: int, alphabet: Sequence[str]) -> Dfa:
    n = int(rng.integers(1, max_states + 1))
    k = len(alphabet)
    table = rng.integers(0, n, size=(n, k)).tolist()
    accepting = frozenset(np.flatnonzero(rng.random(n) < 0.5).tolist())
    return Dfa(tuple(alphabet), table, int(rng.integers(0, n)), accepting)
