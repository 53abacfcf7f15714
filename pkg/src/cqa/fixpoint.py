"""The inflationary k-set fixpoint that under-approximates certainty.

Starting from every k-set that satisfies the query, a k-set ``S`` is added once
some block ``B`` has, for every fact ``u`` of ``B``, a subset of ``S + {u}``
already derived.  The database is accepted when the empty set is derived.
The extended variant (two-atom queries only) adds a second rule whose witness
is a non-self-loop fact ``a`` and the group of facts forming a solution with
``a`` in either order, ``a`` included.

Rounds are synchronous: everything derivable from the table after round ``i``
is stamped ``i + 1``.  Each round's table is upward closed among k-sets, so
the table is stored as a basis of minimal sets; the stamp of any k-set is the
least stamp of a basis set it contains.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Container, Iterable, Iterator, NamedTuple

from .core import (BlockId, ConjunctiveQuery, Database, Fact, check_compatible,
                   render_block_id, render_fact, satisfies, solutions)
from .errors import LimitExceeded, QueryShapeError

DEFAULT_MAX_KSETS = 10**7

KSet = frozenset  # frozenset[Fact] in the public API, frozenset[int] internally


class Mode(str, Enum):
    STANDARD = "standard"
    EXTENDED = "extended"


@dataclass(frozen=True)
class Witness:
    kind: str  # "block" or "fact"
    id: BlockId | Fact

    def label(self, db: Database) -> str:
        if self.kind == "block":
            return render_block_id(self.id)  # type: ignore[arg-type]
        return render_fact(self.id, db.schema)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Derivation:
    round: int
    kset: frozenset[Fact]
    witness: Witness | None  # None for round-0 (solution) entries


def _subsets(s: frozenset[int]) -> Iterator[frozenset[int]]:
    items = sorted(s)
    for r in range(len(items) + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)


class DeltaTable:
    """Derived k-sets with the round at which each was first derived."""

    def __init__(self, db: Database, q: ConjunctiveQuery, k: int, mode: Mode,
                 basis: dict[frozenset[int], int], derivations: list[Derivation],
                 rounds: int):
        self.db = db
        self.q = q
        self.k = k
        self.mode = mode
        self._basis = basis
        self.derivations = derivations
        self.rounds = rounds

    def _ids(self, kset: Iterable[Fact]) -> frozenset[int]:
        return frozenset(self.db.index(f) for f in kset)

    def _facts(self, ids: Iterable[int]) -> frozenset[Fact]:
        return frozenset(self.db.facts[i] for i in ids)

    def _stamp_ids(self, s: frozenset[int]) -> int | None:
        best = None
        for sub in _subsets(s):
            r = self._basis.get(sub)
            if r is not None and (best is None or r < best):
                best = r
        return best

    def stamp(self, kset: Iterable[Fact]) -> int | None:
        """Round at which ``kset`` was derived, or None if it never was."""
        s = self._ids(kset)
        if len(s) > self.k:
            return None
        return self._stamp_ids(s)

    def __contains__(self, kset: object) -> bool:
        return self.stamp(kset) is not None  # type: ignore[arg-type]

    @property
    def accepted(self) -> bool:
        return frozenset() in self._basis

    @property
    def empty_set_round(self) -> int | None:
        return self._basis.get(frozenset())

    def basis(self) -> dict[frozenset[Fact], int]:
        """Minimal derived k-sets: every proper subset has a later stamp or none."""
        return {self._facts(s): r for s, r in self._basis.items()}

    def entries(self) -> dict[frozenset[Fact], int]:
        """Every derived k-set with its stamp.  Exponential in k; use on small inputs."""
        out: dict[frozenset[int], int] = {}
        n = len(self.db)
        for base, r in self._basis.items():
            rest = [i for i in range(n) if i not in base]
            for extra in range(self.k - len(base) + 1):
                for c in itertools.combinations(rest, extra):
                    s = base.union(c)
                    if out.get(s, r + 1) > r:
                        out[s] = r
        return {self._facts(s): r for s, r in out.items()}

    def at_round(self, i: int) -> set[frozenset[Fact]]:
        """The k-sets derived within ``i`` rounds."""
        return {s for s, r in self.entries().items() if r <= i}


class FixpointResult(NamedTuple):
    accepted: bool
    table: DeltaTable
    empty_set_round: int | None


# ---------------------------------------------------------------------------

def _witness_groups(db: Database, q: ConjunctiveQuery, mode: Mode,
                    sols: set[tuple[Fact, ...]]) -> list[tuple[Witness, tuple[int, ...]]]:
    groups = [(Witness("block", bid), tuple(db.index(f) for f in block))
              for bid, block in db.block_index.items()]
    if mode is Mode.EXTENDED:
        for a in db.facts:
            if (a, a) in sols:
                continue
            near = {a}
            for u, v in sols:
                if u == a:
                    near.add(v)
                elif v == a:
                    near.add(u)
            groups.append((Witness("fact", a), tuple(sorted(db.index(b) for b in near))))
    return groups


def _check_cap(n: int, k: int, max_ksets: int) -> None:
    total = sum(math.comb(n, i) for i in range(min(k, n) + 1))
    if total > max_ksets:
        raise LimitExceeded(f"{total} candidate {k}-sets exceed the cap of {max_ksets}")


# The frontier strategy works on bitmasks over fact indices: unions, sizes and
# subset probes are then plain integer operations.

def _submasks(m: int) -> Iterator[int]:
    sub = m
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & m


def _minimal_masks(masks: Iterable[int], excluded: Container[int] = frozenset()) -> list[int]:
    """Minimal members of ``masks`` having no submask in ``excluded``."""
    kept: list[int] = []
    seen: set[int] = set()
    for m in sorted(set(masks), key=int.bit_count):
        if not any(sub in seen or sub in excluded for sub in _submasks(m)):
            kept.append(m)
            seen.add(m)
    return kept


def _to_mask(s: Iterable[int]) -> int:
    m = 0
    for i in s:
        m |= 1 << i
    return m


def _from_mask(m: int) -> frozenset[int]:
    return frozenset(i for i in range(m.bit_length()) if m >> i & 1)


def _residuals(masks: Iterable[int]) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for t in masks:
        rest = t
        while rest:
            low = rest & -rest
            out.setdefault(low.bit_length() - 1, []).append(t & ~low)
            rest ^= low
    return out


def _run_frontier(db, q, k, groups, sols) -> tuple[dict, list, int]:
    basis: dict[int, int] = {}
    log: list[tuple[int, frozenset[int], Witness | None]] = []
    initial = [_to_mask(db.index(f) for f in sol) for sol in sols]
    for m in _minimal_masks(m for m in initial if m.bit_count() <= k):
        basis[m] = 0
        log.append((0, _from_mask(m), None))

    rnd = 0
    delta = list(basis)
    while True:
        every = _residuals(basis)
        fresh = _residuals(delta)
        found: dict[int, Witness] = {}
        for witness, group in groups:
            members = _to_mask(group)
            options = {u: _minimal_masks(r for r in every.get(u, ()) if not r & members)
                       for u in group}
            if not all(options.values()):
                continue
            # anything new this round leans on a set derived last round
            results: set[int] = set()
            for pivot in group:
                pivot_options = [r for r in fresh.get(pivot, ()) if not r & members]
                if not pivot_options:
                    continue
                cands = [0]
                for u in (pivot, *(v for v in group if v != pivot)):
                    opts = pivot_options if u == pivot else options[u]
                    grown = {m for c in cands for r in opts if (m := c | r).bit_count() <= k}
                    # size and coverage are upward closed: pruning partial
                    # unions early loses no minimal result
                    cands = _minimal_masks(grown, basis)
                    if not cands:
                        break
                results.update(cands)
            for m in _minimal_masks(results):
                found.setdefault(m, witness)
        if not found:
            return {_from_mask(m): r for m, r in basis.items()}, log, rnd
        rnd += 1
        delta = _minimal_masks(found)
        for m in delta:
            basis[m] = rnd
            log.append((rnd, _from_mask(m), found[m]))


def _run_naive(db, q, k, groups, sols) -> tuple[dict, list, int]:
    n = len(db)
    universe = [frozenset(c) for r in range(min(k, n) + 1)
                for c in itertools.combinations(range(n), r)]
    table: dict[frozenset[int], int] = {}
    log: list[tuple[int, frozenset[int], Witness | None]] = []
    for s in universe:
        if satisfies((db.facts[i] for i in s), q):
            table[s] = 0
            log.append((0, s, None))
    rnd = 0
    while True:
        memo: dict[frozenset[int], bool] = {}

        def covered(s: frozenset[int]) -> bool:
            if s not in memo:
                memo[s] = any(sub in table for sub in _subsets(s) if len(sub) <= k)
            return memo[s]

        new: dict[frozenset[int], Witness] = {}
        for s in universe:
            if s in table:
                continue
            for witness, group in groups:
                if all(covered(s | {u}) for u in group):
                    new[s] = witness
                    break
        if not new:
            break
        rnd += 1
        for s, witness in new.items():
            table[s] = rnd
            log.append((rnd, s, witness))
    basis = {}
    for s in sorted(table, key=lambda s: (table[s], len(s))):
        if not any(b <= s and r <= table[s] for b, r in basis.items()):
            basis[s] = table[s]
    return basis, log, rnd


def _run(db: Database, q: ConjunctiveQuery, k: int | None, mode: Mode,
         strategy: str, max_ksets: int) -> FixpointResult:
    check_compatible(db, q)
    k = len(q) if k is None else k
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    _check_cap(len(db), k, max_ksets)
    sols = solutions(db, q)
    groups = _witness_groups(db, q, mode, sols)
    if strategy == "frontier":
        basis, log, rounds = _run_frontier(db, q, k, groups, sols)
    elif strategy == "naive":
        basis, log, rounds = _run_naive(db, q, k, groups, sols)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    derivations = [Derivation(r, frozenset(db.facts[i] for i in s), w) for r, s, w in log]
    table = DeltaTable(db, q, k, mode, basis, derivations, rounds)
    return FixpointResult(table.accepted, table, table.empty_set_round)


def run_cqk(db: Database, q: ConjunctiveQuery, k: int | None = None, *,
            strategy: str = "frontier", max_ksets: int = DEFAULT_MAX_KSETS) -> FixpointResult:
    """Run the k-set fixpoint; ``k`` defaults to the number of atoms of ``q``.

    ``strategy="naive"`` scans every k-set each round and materializes the
    full table; ``"frontier"`` only builds minimal derivations.  Both yield
    the same stamps for every k-set.
    """
    return _run(db, q, k, Mode.STANDARD, strategy, max_ksets)


def run_cqk_plus(db: Database, q: ConjunctiveQuery, k: int | None = None, *,
                 strategy: str = "frontier",
                 max_ksets: int = DEFAULT_MAX_KSETS) -> FixpointResult:
    """The fixpoint with the extra fact-neighbourhood rule; two-atom queries only."""
    if len(q) != 2:
        raise QueryShapeError(f"the extended fixpoint needs a two-atom query, got {len(q)} atoms")
    return _run(db, q, k, Mode.EXTENDED, strategy, max_ksets)


# ---------------------------------------------------------------------------
# traces

def trace(table: DeltaTable) -> list[list[Derivation]]:
    """Derivations grouped by round (index = round)."""
    rounds: list[list[Derivation]] = [[] for _ in range(table.rounds + 1)]
    for d in table.derivations:
        rounds[d.round].append(d)
    return rounds


def trace_records(table: DeltaTable) -> list[dict]:
    db = table.db
    out = []
    for d in table.derivations:
        out.append({
            "round": d.round,
            "kset": sorted(render_fact(f, db.schema) for f in d.kset),
            "witness": None if d.witness is None else {
                "type": d.witness.kind, "id": d.witness.label(db)},
        })
    return out


def trace_jsonl(table: DeltaTable) -> str:
    return "".join(json.dumps(rec) + "\n" for rec in trace_records(table))


def replay(db: Database, q: ConjunctiveQuery, records: Iterable[dict], k: int | None = None,
           mode: Mode | str = Mode.STANDARD) -> DeltaTable:
    """Rebuild a table from trace records, checking each derivation against earlier rounds.

    Raises ValueError on the first record that its claimed witness does not justify.
    """
    mode = Mode(mode)
    k = len(q) if k is None else k
    sols = solutions(db, q)
    by_label = {(w.kind, w.label(db)): (w, group)
                for w, group in _witness_groups(db, q, mode, sols)}
    by_text = {render_fact(f, db.schema): db.index(f) for f in db.facts}
    stamps: dict[frozenset[int], int] = {}
    derivations = []
    last = 0
    for rec in sorted(records, key=lambda r: r["round"]):
        rnd = rec["round"]
        s = frozenset(by_text[t] for t in rec["kset"])
        facts = frozenset(db.facts[i] for i in s)
        if len(s) > k:
            raise ValueError(f"record {rec} exceeds k={k}")
        earlier = {t for t, r in stamps.items() if r < rnd}

        def covered(t: frozenset[int]) -> bool:
            return any(sub in earlier for sub in _subsets(t))

        if rnd == 0:
            if not satisfies(facts, q):
                raise ValueError(f"round-0 record {rec} does not satisfy the query")
            witness = None
        else:
            key = (rec["witness"]["type"], rec["witness"]["id"])
            if key not in by_label:
                raise ValueError(f"unknown witness {key!r}")
            witness, group = by_label[key]
            if covered(s) or not all(covered(s | {u}) for u in group):
                raise ValueError(f"record {rec} is not derivable at round {rnd}")
        stamps.setdefault(s, rnd)
        derivations.append(Derivation(rnd, facts, witness))
        last = max(last, rnd)
    basis = {}
    for s in sorted(stamps, key=lambda s: (stamps[s], len(s))):
        if not any(b <= s and r <= stamps[s] for b, r in basis.items()):
            basis[s] = stamps[s]
    return DeltaTable(db, q, k, mode, basis, derivations, last)
