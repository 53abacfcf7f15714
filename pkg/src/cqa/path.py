"""Path queries: the prefix automaton, the factor and prefix language
conditions, and the pair fixpoint deciding certainty for tractable paths."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .core import ConjunctiveQuery, Database
from .errors import QueryShapeError, SchemaError

Word = tuple[str, ...]


def as_word(q: ConjunctiveQuery | Sequence[str]) -> Word:
    if isinstance(q, ConjunctiveQuery):
        if not q.is_path():
            raise QueryShapeError(f"not a path query: {q}")
        return q.path_word()
    word = tuple(q)
    if not word:
        raise QueryShapeError("empty path word")
    return word


@dataclass(frozen=True)
class PathAutomaton:
    """States are prefix lengths 0..n; state i reads word[i] to reach i+1.

    An epsilon move i -> j (1 <= j < i) exists when the prefixes of length i
    and j end with the same letter, so a run can restart from an earlier
    occurrence of the letter just read.
    """

    word: Word
    epsilon: frozenset[tuple[int, int]]

    @property
    def n(self) -> int:
        return len(self.word)

    @property
    def states(self) -> range:
        return range(self.n + 1)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.word)))

    def prefix(self, i: int) -> Word:
        return self.word[:i]

    def closure(self, states) -> frozenset[int]:
        out = set(states)
        stack = list(out)
        while stack:
            i = stack.pop()
            for src, dst in self.epsilon:
                if src == i and dst not in out:
                    out.add(dst)
                    stack.append(dst)
        return frozenset(out)

    def step(self, states: frozenset[int], letter: str) -> frozenset[int]:
        return self.closure(i + 1 for i in states if i < self.n and self.word[i] == letter)

    def accepts(self, w: Sequence[str]) -> bool:
        cur = self.closure({0})
        for letter in w:
            cur = self.step(cur, letter)
        return self.n in cur

    def to_dot(self) -> str:
        name = lambda i: "".join(self.word[:i]) or "eps"
        lines = ["digraph automaton {", "  rankdir=LR;"]
        for i in self.states:
            shape = "doublecircle" if i == self.n else "circle"
            lines.append(f'  s{i} [label="{name(i)}", shape={shape}];')
        for i in range(self.n):
            lines.append(f'  s{i} -> s{i + 1} [label="{self.word[i]}"];')
        for i, j in sorted(self.epsilon):
            lines.append(f'  s{i} -> s{j} [label="eps", style=dashed];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_automaton(q: ConjunctiveQuery | Sequence[str]) -> PathAutomaton:
    word = as_word(q)
    eps = frozenset((i, j) for i in range(2, len(word) + 1) for j in range(1, i)
                    if word[j - 1] == word[i - 1])
    return PathAutomaton(word, eps)


def _kmp_dfa(word: Word, alphabet: Sequence[str]) -> list[dict[str, int]]:
    """DFA over states 0..n tracking the longest prefix of ``word`` that is a
    suffix of the input; state n is absorbing."""
    n = len(word)
    fail = [0] * (n + 1)
    k = 0
    for i in range(1, n):
        while k and word[i] != word[k]:
            k = fail[k]
        if word[i] == word[k]:
            k += 1
        fail[i + 1] = k
    delta: list[dict[str, int]] = []
    for state in range(n + 1):
        row = {}
        for a in alphabet:
            if state == n:
                row[a] = n
                continue
            s = state
            while s and word[s] != a:
                s = fail[s]
            row[a] = s + 1 if word[s] == a else 0
        delta.append(row)
    return delta


def _prefix_dfa(word: Word, alphabet: Sequence[str]) -> list[dict[str, int]]:
    """DFA for words starting with ``word``: states 0..n, n absorbing, -1 dead."""
    n = len(word)
    delta = []
    for state in range(n + 1):
        delta.append({a: n if state == n else (state + 1 if word[state] == a else -1)
                      for a in alphabet})
    return delta


def counterexample_word(q: ConjunctiveQuery | Sequence[str], mode: str = "factor") -> Word | None:
    """A shortest accepted word lacking ``q`` as a factor (or prefix), or None."""
    aut = build_automaton(q)
    alphabet = aut.alphabet
    if mode == "factor":
        delta = _kmp_dfa(aut.word, alphabet)
    elif mode == "prefix":
        delta = _prefix_dfa(aut.word, alphabet)
    else:
        raise ValueError(f"mode must be 'factor' or 'prefix', got {mode!r}")
    start = (aut.closure({0}), 0)
    prev: dict = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        states, d = node
        if aut.n in states and d != aut.n:
            out = []
            while prev[node] is not None:
                node, letter = prev[node]
                out.append(letter)
            return tuple(reversed(out))
        for a in alphabet:
            nxt_states = aut.step(states, a)
            if not nxt_states:
                continue
            nxt_d = -1 if d == -1 else delta[d][a]
            nxt = (nxt_states, nxt_d)
            if nxt not in prev:
                prev[nxt] = (node, a)
                queue.append(nxt)
    return None


def factor_condition(q: ConjunctiveQuery | Sequence[str]) -> bool:
    """Whether every accepted word contains ``q`` as a factor."""
    return counterexample_word(q, "factor") is None


def prefix_condition(q: ConjunctiveQuery | Sequence[str]) -> bool:
    """Whether every accepted word starts with ``q``."""
    return counterexample_word(q, "prefix") is None


# ---------------------------------------------------------------------------
# the pair fixpoint

@dataclass
class NTable:
    """Pairs (constant, prefix length) with the round each was derived in."""

    word: Word
    stamps: dict[tuple[str, int], int] = field(default_factory=dict)
    rounds: int = 0

    def __contains__(self, pair: object) -> bool:
        return pair in self.stamps

    def entries(self) -> set[tuple[str, int]]:
        return set(self.stamps)

    def at_round(self, i: int) -> set[tuple[str, int]]:
        return {p for p, r in self.stamps.items() if r <= i}

    @property
    def accepted(self) -> bool:
        return any(s == 0 for _, s in self.stamps)

    @property
    def empty_prefix_round(self) -> int | None:
        rounds = [r for (_, s), r in self.stamps.items() if s == 0]
        return min(rounds) if rounds else None

    def render(self) -> list[str]:
        name = lambda s: " ".join(self.word[:s]) or "eps"
        return [f"{r}\t{c}\t{name(s)}" for (c, s), r in
                sorted(self.stamps.items(), key=lambda kv: (kv[1], kv[0]))]


def _check_binary(db: Database, word: Word) -> None:
    for rel in set(word):
        if rel in db.schema:
            rs = db.schema[rel]
            if rs.arity != 2 or rs.key_positions != (1,):
                raise SchemaError(f"path relation {rs.describe(rel)} must be binary keyed on 1")


def run_n_fixpoint(db: Database, q: ConjunctiveQuery | Sequence[str]) -> tuple[bool, NTable]:
    aut = build_automaton(q)
    word, n = aut.word, aut.n
    _check_binary(db, word)
    # successors[(R, c)] = values b of facts R(c; b)
    successors: dict[tuple[str, str], list[str]] = {}
    for f in db.facts:
        if f.relation in word:
            successors.setdefault((f.relation, f.args[0]), []).append(f.args[1])
    # pair (c, l) needs every R(c; b) to carry (b, j + 1) for some (R, j) in reads[l]
    reads: dict[int, list[int]] = {l: [l] if l < n else [] for l in range(n + 1)}
    for i, j in aut.epsilon:
        reads[i].append(j)

    table = NTable(word, {(c, n): 0 for c in sorted(db.adom)})
    round_no = 0
    while True:
        round_no += 1
        new = []
        for c in sorted(db.adom):
            for l in range(n):
                if (c, l) in table:
                    continue
                for j in reads[l]:
                    bs = successors.get((word[j], c))
                    if bs and all((b, j + 1) in table for b in bs):
                        new.append((c, l))
                        break
            # state n is seeded for every constant, nothing to add there
        if not new:
            break
        for p in new:
            table.stamps[p] = round_no
        table.rounds = round_no
    return table.accepted, table
