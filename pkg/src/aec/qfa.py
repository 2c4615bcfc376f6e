"""Quantum finite automata with one superoperator per symbol.

Each symbol (and the left endmarker ``^``, read once before the input) acts
through ``l`` operation elements ``E_1..E_l`` with ``sum E_j^dagger E_j = I``.
After every symbol the auxiliary register is measured, so a run either
tracks a density operator or an explicit tree of pure branches; both are
provided. The final measurement is in the computational basis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .automata import ENDMARKER, Dfa, DfaError, as_word, check_alphabet, in_degree_profile
from .transforms import lj_successor, lj_alphabet, spread_bags

COMPLETENESS_TOL = 1e-9
PROB_TOL = 1e-9
ZERO_ERROR_TOL = 1e-7
SUBSPACE_TOL = 1e-6
DROP_TOL = 1e-10
DEFAULT_BRANCH_CAP = 10**5


class QfaError(ValueError):
    pass


class NotZeroError(QfaError):
    pass


@dataclass(frozen=True)
class Qfa:
    """``superoperators[s]`` is an ``(l, n, n)`` complex array; entry ``[j, r, c]`` maps state ``c`` to ``r``."""

    n: int
    alphabet: tuple[str, ...]
    superoperators: Mapping[str, np.ndarray]
    start: int
    accepting: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        object.__setattr__(self, "accepting", frozenset(int(q) for q in self.accepting))
        ops = {}
        for s in (ENDMARKER,) + self.alphabet:
            if s not in self.superoperators:
                raise QfaError(f"missing superoperator for {s!r}")
            E = np.array(self.superoperators[s], dtype=complex)
            if E.ndim != 3 or E.shape[1:] != (self.n, self.n):
                raise QfaError(f"superoperator {s!r} must have shape (l, {self.n}, {self.n}), got {E.shape}")
            if not np.isfinite(E).all():
                raise QfaError(f"superoperator {s!r} has non-finite entries")
            E.flags.writeable = False
            ops[s] = E
        extra = set(self.superoperators) - set(ops)
        if extra:
            raise QfaError(f"superoperators for unknown symbols {sorted(extra)}")
        if len({E.shape[0] for E in ops.values()}) != 1:
            raise QfaError("all superoperators must have the same number of operation elements")
        object.__setattr__(self, "superoperators", ops)
        if not 0 <= self.start < self.n:
            raise QfaError(f"start state {self.start} out of range")
        if any(not 0 <= q < self.n for q in self.accepting):
            raise QfaError("accepting state out of range")

    @property
    def l(self) -> int:
        return self.superoperators[ENDMARKER].shape[0]

    def word(self, w) -> tuple[str, ...]:
        try:
            return as_word(w, self.alphabet)
        except DfaError as e:
            raise QfaError(str(e)) from None


def completeness_residual(elements: np.ndarray) -> float:
    total = np.einsum("jki,jkl->il", elements.conj(), elements)
    return float(np.linalg.norm(total - np.eye(elements.shape[1])))


def validate_qfa(m: Qfa) -> None:
    for s, E in m.superoperators.items():
        r = completeness_residual(E)
        if r > COMPLETENESS_TOL:
            raise QfaError(f"superoperator {s!r} violates completeness (residual {r:.3g})")


def step_energy(m: Qfa) -> float:
    return math.log2(m.l)


# -- simulation -------------------------------------------------------------------

def _apply(E: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return (E @ rho @ E.conj().transpose(0, 2, 1)).sum(axis=0)


def _initial(m: Qfa) -> np.ndarray:
    rho = np.zeros((m.n, m.n), dtype=complex)
    rho[m.start, m.start] = 1.0
    return _apply(m.superoperators[ENDMARKER], rho)


def density_trajectory(m: Qfa, w) -> Iterator[np.ndarray]:
    """Density operators after the endmarker and after each input symbol."""
    rho = _initial(m)
    yield rho
    for s in m.word(w):
        rho = _apply(m.superoperators[s], rho)
        yield rho


def _accept_mass(m: Qfa, rho: np.ndarray) -> float:
    p = float(sum(rho[q, q].real for q in m.accepting))
    if not -PROB_TOL <= p <= 1 + PROB_TOL:
        raise QfaError(f"acceptance probability {p} out of range")
    return min(max(p, 0.0), 1.0)


def accept_prob(m: Qfa, w) -> float:
    for rho in density_trajectory(m, w):
        pass
    return _accept_mass(m, rho)


@dataclass(frozen=True)
class Ensemble:
    branches: tuple[tuple[float, np.ndarray], ...]

    def total(self) -> float:
        return math.fsum(p for p, _ in self.branches)

    def accept_prob(self, accepting) -> float:
        idx = sorted(accepting)
        return math.fsum(p * float(np.sum(np.abs(v[idx]) ** 2)) for p, v in self.branches)


def branch_run(m: Qfa, w, max_branches: int = DEFAULT_BRANCH_CAP) -> Ensemble:
    """Track every measurement outcome as a separate normalized branch."""
    v = np.zeros(m.n, dtype=complex)
    v[m.start] = 1.0
    branches = [(1.0, v)]
    for s in (ENDMARKER,) + m.word(w):
        nxt = []
        for p, v in branches:
            for E in m.superoperators[s]:
                u = E @ v
                q = float(np.vdot(u, u).real)
                if q > DROP_TOL**2:
                    nxt.append((p * q, u / math.sqrt(q)))
        if len(nxt) > max_branches:
            raise QfaError(f"branch count {len(nxt)} exceeds cap {max_branches}")
        branches = nxt
    return Ensemble(tuple(branches))


def words_with_densities(m: Qfa, n_max: int) -> Iterator[tuple[tuple[str, ...], np.ndarray]]:
    """All words of length at most ``n_max`` in length-lexicographic order, with their final densities."""
    level = [((), _initial(m))]
    for length in range(n_max + 1):
        yield from level
        if length == n_max:
            break
        level = [
            (word + (s,), _apply(m.superoperators[s], rho))
            for word, rho in level
            for s in m.alphabet
        ]


def is_zero_error(m: Qfa, n_max: int) -> tuple[bool, tuple[str, ...] | None]:
    for word, rho in words_with_densities(m, n_max):
        p = _accept_mass(m, rho)
        if min(p, 1 - p) > ZERO_ERROR_TOL:
            return False, word
    return True, None


def worst_error(m: Qfa, member: Callable[[Sequence[str]], bool], n_max: int) -> tuple[float, tuple[str, ...]]:
    worst, witness = -1.0, ()
    for word, rho in words_with_densities(m, n_max):
        p = _accept_mass(m, rho)
        err = 1 - p if member(word) else p
        if err > worst:
            worst, witness = err, word
    return worst, witness


def max_error(m: Qfa, member: Callable[[Sequence[str]], bool], n_max: int) -> float:
    return worst_error(m, member, n_max)[0]


# -- construction -----------------------------------------------------------------

def _classical_elements(targets: Sequence[int], l: int) -> np.ndarray:
    """0/1 operation elements for a map of states; the k-th source (ascending) of a target uses element k."""
    n = len(targets)
    E = np.zeros((l, n, n), dtype=complex)
    rank = [0] * n
    for q, t in enumerate(targets):
        E[rank[t], t, q] = 1.0
        rank[t] += 1
    return E


def _branching_endmarker(n: int, l: int, start: int, image: np.ndarray) -> np.ndarray:
    """Element 0 sends ``start`` to the unit vector ``image``; element 1 keeps every other basis state."""
    E = np.zeros((l, n, n), dtype=complex)
    E[0, :, start] = image
    E[1] = np.eye(n)
    E[1, start, start] = 0.0
    return E


def from_dfa(d: Dfa) -> Qfa:
    l = max(1, in_degree_profile(d).max())
    ops = {s: _classical_elements(d.table[:, i].tolist(), l) for i, s in enumerate(d.alphabet)}
    end = np.zeros((l, d.state_count, d.state_count), dtype=complex)
    end[0] = np.eye(d.state_count)
    ops[ENDMARKER] = end
    return Qfa(d.state_count, d.alphabet, ops, d.start, d.accepting)


def gen_M2() -> Qfa:
    """Ten states: start 0, two four-state pair detectors (1-4, 5-8) and an always-accepting state 9."""
    s1 = [0, 2, 2, 4, 4, 5, 7, 5, 7, 9]
    s2 = [0, 1, 3, 1, 3, 6, 6, 8, 8, 9]
    image = np.zeros(10)
    image[[1, 5, 9]] = 1 / math.sqrt(3)
    ops = {
        ENDMARKER: _branching_endmarker(10, 2, 0, image),
        "s1": _classical_elements(s1, 2),
        "s2": _classical_elements(s2, 2),
    }
    return Qfa(10, lj_alphabet(2), ops, 0, frozenset({3, 7, 9}))


def gen_Mj(j: int) -> Qfa:
    """State 0 always accepts and is the start; detector ``i`` uses states ``3i-2 .. 3i``.

    Detector ``i`` waits in its first state, moves to the second after
    ``s_i`` and to the accepting third after ``s_i s_F(i)``.
    """
    if j < 3:
        raise QfaError("gen_Mj needs j >= 3")
    n = 3 * j + 1
    ops = {}
    for k in range(1, j + 1):
        targets = [0] * n
        for i in range(1, j + 1):
            wait, seen, done = 3 * i - 2, 3 * i - 1, 3 * i
            targets[wait] = seen if k == i else wait
            targets[seen] = seen if k == i else done if k == lj_successor(i, j) else wait
            targets[done] = seen if k == i else wait
        ops[f"s{k}"] = _classical_elements(targets, 3)
    image = np.zeros(n)
    image[[3 * i - 2 for i in range(1, j + 1)]] = 1 / math.sqrt(2 * j - 1)
    image[0] = math.sqrt((j - 1) / (2 * j - 1))
    ops[ENDMARKER] = _branching_endmarker(n, 3, 0, image)
    return Qfa(n, lj_alphabet(j), ops, 0, frozenset([0] + [3 * i for i in range(1, j + 1)]))


# -- zero-error extraction ----------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray  # (n, dim), orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, other: "Subspace", tol: float = SUBSPACE_TOL) -> bool:
        rest = other.basis - self.projector() @ other.basis
        return float(np.linalg.norm(rest)) <= tol

    def overlaps(self, other: "Subspace", tol: float = SUBSPACE_TOL) -> bool:
        return float(np.linalg.norm(self.projector() @ other.projector())) > tol


def span(vectors: Sequence[np.ndarray], n: int, drop: float = DROP_TOL) -> Subspace:
    """Orthonormal basis by modified Gram-Schmidt, orthogonalizing twice."""
    basis: list[np.ndarray] = []
    for v in vectors:
        u = np.array(v, dtype=complex)
        scale = np.linalg.norm(u)
        if scale <= drop:
            continue
        for _ in range(2):
            for b in basis:
                u = u - np.vdot(b, u) * b
        norm = np.linalg.norm(u)
        if norm > drop * max(scale, 1.0):
            basis.append(u / norm)
    return Subspace(np.array(basis).T if basis else np.zeros((n, 0), dtype=complex))


def _image(m: Qfa, S: Subspace, symbol: str) -> Subspace:
    return span([E @ b for E in m.superoperators[symbol] for b in S.basis.T], m.n)


def _classify(m: Qfa, S: Subspace) -> bool:
    acc = sorted(m.accepting)
    rej = sorted(set(range(m.n)) - m.accepting)
    rej_mass = float(np.linalg.norm(S.basis[rej])) if rej else 0.0
    acc_mass = float(np.linalg.norm(S.basis[acc])) if acc else 0.0
    if rej_mass <= ZERO_ERROR_TOL:
        return True
    if acc_mass <= ZERO_ERROR_TOL:
        return False
    raise NotZeroError(
        f"not zero-error: mixed subspace (accepting weight {acc_mass:.3g}, rejecting weight {rej_mass:.3g})"
    )


@dataclass(frozen=True)
class Closure:
    nodes: tuple[Subspace, ...]
    start: int
    delta: tuple[tuple[int, ...], ...]
    accepting: frozenset[int]


def subspace_closure(m: Qfa) -> Closure:
    """Reachable subspaces of attainable state vectors, merged until transitions are deterministic.

    Two nodes that are not orthogonal must lie in the same language class, so
    any overlap triggers a merge and a fresh pass over all nodes.
    """
    v = np.zeros(m.n, dtype=complex)
    v[m.start] = 1.0
    init = span([E @ v for E in m.superoperators[ENDMARKER]], m.n)
    nodes = [init]
    _classify(m, init)
    max_passes = 4 * m.n * m.n + 4
    for _ in range(max_passes):
        trans: dict[tuple[int, int], int] = {}
        merged = False
        i = 0
        while i < len(nodes) and not merged:
            for s, sym in enumerate(m.alphabet):
                T = _image(m, nodes[i], sym)
                hits = [c for c, N in enumerate(nodes) if N.overlaps(T)]
                if len(hits) == 1 and nodes[hits[0]].contains(T):
                    trans[i, s] = hits[0]
                    continue
                if not hits:
                    nodes.append(T)
                    trans[i, s] = len(nodes) - 1
                else:
                    joined = span([b for c in hits for b in nodes[c].basis.T] + list(T.basis.T), m.n)
                    nodes = [N for c, N in enumerate(nodes) if c not in hits] + [joined]
                    merged = True
                if sum(N.dim for N in nodes) > m.n:
                    raise QfaError(
                        f"closure exceeds {m.n} orthogonal dimensions; numerical tolerance too loose"
                    )
                _classify(m, nodes[-1])
                if merged:
                    break
            i += 1
        if not merged:
            break
    else:
        raise QfaError("subspace closure did not stabilize")
    start = next(c for c, N in enumerate(nodes) if N.contains(init))
    delta = tuple(tuple(trans[i, s] for s in range(len(m.alphabet))) for i in range(len(nodes)))
    accepting = frozenset(c for c, N in enumerate(nodes) if _classify(m, N))
    return Closure(tuple(nodes), start, delta, accepting)


def extract_dfa(m: Qfa, verify_len: int = 6) -> Dfa:
    """DFA with at most ``n`` states and same-symbol in-degree at most ``l`` for a zero-error QFA.

    Each closure node becomes ``dim`` equivalent states sharing its incoming
    edges round-robin. The result is checked against the QFA on every word
    up to ``verify_len``.
    """
    closure = subspace_closure(m)
    bags = Dfa(m.alphabet, closure.delta, closure.start, closure.accepting)
    d = spread_bags(bags, [N.dim for N in closure.nodes])
    for word, rho in words_with_densities(m, verify_len):
        p = _accept_mass(m, rho)
        if min(p, 1 - p) > ZERO_ERROR_TOL or (p > 0.5) != (d.run(word) in d.accepting):
            raise NotZeroError(f"not zero-error: word {' '.join(word)!r} accepted with probability {p:.6g}")
    return d


# -- JSON -------------------------------------------------------------------------

def serialize_qfa(m: Qfa) -> str:
    def element(E):
        return [[[float(z.real), float(z.imag)] for z in row] for row in E]

    doc = {
        "n": m.n,
        "alphabet": list(m.alphabet),
        "start": m.start,
        "accept": sorted(m.accepting),
        "superoperators": {s: [element(E) for E in m.superoperators[s]] for s in (ENDMARKER,) + m.alphabet},
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_qfa(text: str) -> Qfa:
    try:
        doc = json.loads(text)
        n = int(doc["n"])
        ops = {}
        for s, elements in doc["superoperators"].items():
            arr = np.array(elements, dtype=float)
            if arr.ndim != 4 or arr.shape[-1] != 2:
                raise QfaError(f"superoperator {s!r}: entries must be [re, im] pairs in n x n arrays")
            ops[s] = arr[..., 0] + 1j * arr[..., 1]
        return Qfa(n, tuple(doc["alphabet"]), ops, int(doc["start"]), frozenset(doc["accept"]))
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise QfaError(f"malformed QFA JSON: {e}") from None
