"""Deterministic finite automata: representation, text format, and structural queries.

States are dense 0-based indices and every machine is total. Symbols are
whitespace-free tokens; ``^`` is reserved for the quantum endmarker.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

ENDMARKER = "^"


class DfaError(ValueError):
    """Raised for malformed machines, bad files, and unknown symbols."""


def check_alphabet(symbols: Iterable[str]) -> tuple[str, ...]:
    symbols = tuple(symbols)
    if not symbols:
        raise DfaError("alphabet must be non-empty")
    if len(set(symbols)) != len(symbols):
        raise DfaError(f"duplicate symbols in alphabet {symbols}")
    for s in symbols:
        if not isinstance(s, str) or not s or any(c.isspace() for c in s):
            raise DfaError(f"bad symbol {s!r}")
        if s == ENDMARKER:
            raise DfaError(f"symbol {ENDMARKER!r} is reserved for the endmarker")
    return symbols


def as_word(w, alphabet: Sequence[str]) -> tuple[str, ...]:
    """Coerce ``w`` into a tuple of symbols.

    Strings are split on whitespace; a single unknown token made only of
    one-character symbols is split into characters, so ``"abb"`` works for
    the alphabet ``a b`` while ``"s1 s2"`` works for ``s1 s2``.
    """
    if isinstance(w, str):
        tokens = w.split()
        if len(tokens) == 1 and tokens[0] not in alphabet and all(c in alphabet for c in tokens[0]):
            tokens = list(tokens[0])
        w = tokens
    word = tuple(w)
    for s in word:
        if s not in alphabet:
            raise DfaError(f"unknown symbol {s!r}")
    return word


def format_word(word: Sequence[str]) -> str:
    if all(len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(word)


@dataclass(frozen=True)
class Dfa:
    """A complete DFA. ``delta[q][i]`` is the successor of ``q`` on ``alphabet[i]``."""

    alphabet: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]
    start: int
    accepting: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        object.__setattr__(self, "delta", tuple(tuple(int(t) for t in row) for row in self.delta))
        object.__setattr__(self, "accepting", frozenset(int(q) for q in self.accepting))
        n, k = len(self.delta), len(self.alphabet)
        if n == 0:
            raise DfaError("a DFA needs at least one state")
        for q, row in enumerate(self.delta):
            if len(row) != k:
                raise DfaError(f"non-total delta: state {q} has {len(row)} transitions, expected {k}")
            for t in row:
                if not 0 <= t < n:
                    raise DfaError(f"unknown state {t} in transitions of state {q}")
        if not 0 <= self.start < n:
            raise DfaError(f"start state {self.start} out of range")
        bad = [q for q in self.accepting if not 0 <= q < n]
        if bad:
            raise DfaError(f"accepting states out of range: {sorted(bad)}")

    @property
    def state_count(self) -> int:
        return len(self.delta)

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.alphabet)}

    @cached_property
    def table(self) -> np.ndarray:
        t = np.array(self.delta, dtype=np.int64).reshape(self.state_count, len(self.alphabet))
        t.flags.writeable = False
        return t

    def step(self, q: int, symbol: str) -> int:
        return self.delta[q][self.index[symbol]]

    def run(self, w) -> int:
        q = self.start
        for s in as_word(w, self.alphabet):
            q = self.delta[q][self.index[s]]
        return q

    def __repr__(self):
        return (f"Dfa(states={self.state_count}, alphabet={' '.join(self.alphabet)}, "
                f"start={self.start}, accept={sorted(self.accepting)})")


def validate_dfa(d: Dfa) -> None:
    """Re-run construction checks; raises DfaError if ``d`` is malformed."""
    Dfa(d.alphabet, d.delta, d.start, d.accepting)


@dataclass(frozen=True)
class InDegreeProfile:
    """``counts[q, i]`` is the number of states whose ``alphabet[i]`` edge enters ``q``."""

    alphabet: tuple[str, ...]
    counts: np.ndarray

    def chi(self, q: int, symbol: str) -> int:
        return int(self.counts[q, self.alphabet.index(symbol)])

    def max(self) -> int:
        return int(self.counts.max())


@dataclass(frozen=True)
class RunTrace:
    states: tuple[int, ...]
    symbols: tuple[str, ...]
    per_step_bits: tuple[float, ...]

    @property
    def bits(self) -> float:
        return math.fsum(self.per_step_bits)


# -- text format ---------------------------------------------------------------

def parse_dfa(text: str) -> Dfa:
    alphabet = None
    n = None
    start = None
    accept = None
    trans: dict[tuple[int, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise DfaError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        fields = rest.split()
        try:
            if key == "alphabet":
                alphabet = check_alphabet(fields)
            elif key == "states":
                (n,) = map(int, fields)
                if n < 1:
                    raise DfaError(f"line {lineno}: state count must be positive")
            elif key == "start":
                (start,) = map(int, fields)
            elif key == "accept":
                accept = [int(f) for f in fields]
            elif key == "trans":
                src, sym, dst = fields
                src, dst = int(src), int(dst)
                if sym == ENDMARKER:
                    raise DfaError(f"line {lineno}: symbol {ENDMARKER!r} is reserved")
                if (src, sym) in trans:
                    raise DfaError(f"line {lineno}: duplicate transition ({src}, {sym})")
                trans[src, sym] = dst
            else:
                raise DfaError(f"line {lineno}: unknown key {key!r}")
        except ValueError as e:
            if isinstance(e, DfaError):
                raise
            raise DfaError(f"line {lineno}: malformed {key!r} line") from None
    for name, val in (("alphabet", alphabet), ("states", n), ("start", start), ("accept", accept)):
        if val is None:
            raise DfaError(f"missing '{name}:' line")
    for (src, sym), dst in trans.items():
        if sym not in alphabet:
            raise DfaError(f"unknown symbol {sym!r} in transition from {src}")
        if not 0 <= src < n or not 0 <= dst < n:
            raise DfaError(f"unknown state in transition ({src}, {sym}) -> {dst}")
    delta = []
    for q in range(n):
        row = []
        for s in alphabet:
            if (q, s) not in trans:
                raise DfaError(f"non-total delta: missing transition ({q}, {s})")
            row.append(trans[q, s])
        delta.append(row)
    return Dfa(alphabet, delta, start, frozenset(accept))


def serialize_dfa(d: Dfa) -> str:
    lines = [
        f"alphabet: {' '.join(d.alphabet)}",
        f"states: {d.state_count}",
        f"start: {d.start}",
        ("accept: " + " ".join(map(str, sorted(d.accepting)))).rstrip(),
    ]
    for q, row in enumerate(d.delta):
        for s, t in zip(d.alphabet, row):
            lines.append(f"trans: {q} {s} {t}")
    return "\n".join(lines) + "\n"


# -- runs and in-degrees -------------------------------------------------------

def accepts(d: Dfa, w) -> bool:
    return d.run(w) in d.accepting


def in_degree_profile(d: Dfa) -> InDegreeProfile:
    counts = np.zeros((d.state_count, len(d.alphabet)), dtype=np.int64)
    for i in range(len(d.alphabet)):
        np.add.at(counts[:, i], d.table[:, i], 1)
    counts.flags.writeable = False
    return InDegreeProfile(d.alphabet, counts)


def run_trace(d: Dfa, w) -> RunTrace:
    word = as_word(w, d.alphabet)
    chi = in_degree_profile(d).counts
    states = [d.start]
    bits = []
    for s in word:
        i = d.index[s]
        q = d.delta[states[-1]][i]
        states.append(q)
        bits.append(math.log2(chi[q, i]))
    return RunTrace(tuple(states), word, tuple(bits))


def max_in_degree(d: Dfa) -> int:
    return in_degree_profile(d).max()


def is_reversible_dfa(d: Dfa) -> bool:
    return max_in_degree(d) <= 1


# -- renumbering, minimization, equivalence ------------------------------------

def reachable_states(d: Dfa) -> list[int]:
    """States reachable from start, in BFS order with symbols in alphabet order."""
    order = [d.start]
    seen = {d.start}
    for q in order:
        for t in d.delta[q]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    return order


def renumber_canonical(d: Dfa) -> Dfa:
    order = reachable_states(d)
    new = {q: i for i, q in enumerate(order)}
    delta = [[new[t] for t in d.delta[q]] for q in order]
    accepting = frozenset(new[q] for q in d.accepting if q in new)
    return Dfa(d.alphabet, delta, 0, accepting)


def _hopcroft_blocks(d: Dfa) -> list[int]:
    """Block id per state of the coarsest partition compatible with acceptance."""
    n, k = d.state_count, len(d.alphabet)
    inverse = [[[] for _ in range(n)] for _ in range(k)]
    for q, row in enumerate(d.delta):
        for i, t in enumerate(row):
            inverse[i][t].append(q)

    accepting = set(d.accepting)
    rejecting = set(range(n)) - accepting
    blocks = [b for b in (accepting, rejecting) if b]
    block_of = [0] * n
    for b, members in enumerate(blocks):
        for q in members:
            block_of[q] = b
    work = [min(range(len(blocks)), key=lambda b: len(blocks[b]))] if len(blocks) == 2 else []

    while work:
        splitter = blocks[work.pop()].copy()
        for i in range(k):
            pre = {p for q in splitter for p in inverse[i][q]}
            touched: dict[int, set[int]] = {}
            for p in pre:
                touched.setdefault(block_of[p], set()).add(p)
            for b in sorted(touched):
                inside = touched[b]
                if len(inside) == len(blocks[b]):
                    continue
                outside = blocks[b] - inside
                blocks[b] = inside
                blocks.append(outside)
                nb = len(blocks) - 1
                for q in outside:
                    block_of[q] = nb
                if b in work:
                    work.append(nb)
                else:
                    work.append(b if len(inside) <= len(outside) else nb)
    return block_of


def minimize(d: Dfa) -> Dfa:
    """Minimal equivalent DFA, canonically numbered (start is 0)."""
    d = renumber_canonical(d)
    block_of = _hopcroft_blocks(d)
    reps: dict[int, int] = {}
    for q in range(d.state_count):
        reps.setdefault(block_of[q], q)
    delta = {b: [block_of[t] for t in d.delta[q]] for b, q in reps.items()}
    ids = {b: i for i, b in enumerate(sorted(reps))}
    quotient = Dfa(
        d.alphabet,
        [[ids[t] for t in delta[b]] for b in sorted(reps)],
        ids[block_of[d.start]],
        frozenset(ids[block_of[q]] for q in d.accepting),
    )
    return renumber_canonical(quotient)


def equivalent(a: Dfa, b: Dfa) -> tuple[bool, tuple[str, ...] | None]:
    """Language equality, with the shortest (then lexicographically least) counterexample."""
    if set(a.alphabet) != set(b.alphabet):
        raise DfaError(f"alphabet mismatch: {a.alphabet} vs {b.alphabet}")
    bidx = [b.index[s] for s in a.alphabet]
    root = (a.start, b.start)
    parent: dict[tuple[int, int], tuple[tuple[int, int], str] | None] = {root: None}
    queue = deque([root])
    while queue:
        p, q = node = queue.popleft()
        if (p in a.accepting) != (q in b.accepting):
            word = []
            while parent[node] is not None:
                node, s = parent[node]
                word.append(s)
            return False, tuple(reversed(word))
        for i, s in enumerate(a.alphabet):
            nxt = (a.delta[p][i], b.delta[q][bidx[i]])
            if nxt not in parent:
                parent[nxt] = (node, s)
                queue.append(nxt)
    return True, None


def is_group_language(d: Dfa) -> bool:
    m = minimize(d)
    n = m.state_count
    return all(len(set(m.table[:, i].tolist())) == n for i in range(len(m.alphabet)))


def fingerprint(d: Dfa) -> str:
    """Short content hash of the canonical text form; identical for isomorphic reachable machines."""
    return hashlib.sha256(serialize_dfa(renumber_canonical(d)).encode()).hexdigest()[:16]
