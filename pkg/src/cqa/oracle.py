"""Ground truth for certainty.

Two exact procedures.  ``certain_by_enumeration`` walks every repair.  The
default ``certain`` searches block by block for a repair avoiding every
solution, discarding a fact as soon as choosing it would complete one; it
explores the same space, only pruned, so its answer is identical.
"""

from __future__ import annotations

from .core import (DEFAULT_REPAIR_LIMIT, ConjunctiveQuery, Database, Fact, Repair,
                   check_compatible, repairs, satisfies, solutions)
from .errors import LimitExceeded


def counterexample_by_enumeration(db: Database, q: ConjunctiveQuery,
                                  limit: int = DEFAULT_REPAIR_LIMIT) -> Repair | None:
    """First repair (canonical order) with no solution to ``q``, if any."""
    for r in repairs(db, limit):
        if not satisfies(r.facts, q):
            return r
    return None


def certain_by_enumeration(db: Database, q: ConjunctiveQuery,
                           limit: int = DEFAULT_REPAIR_LIMIT) -> bool:
    return counterexample_by_enumeration(db, q, limit) is None


def counterexample_repair(db: Database, q: ConjunctiveQuery,
                          limit: int = DEFAULT_REPAIR_LIMIT) -> Repair | None:
    """A repair with no solution to ``q``, or None when ``q`` is certain.

    ``limit`` bounds the number of search nodes.
    """
    check_compatible(db, q)
    # only solutions that fit inside some repair can be hit
    forbidden = {frozenset(s) for s in solutions(db, q)}
    forbidden = [s for s in forbidden if db.is_partial_repair(s)]
    touching: dict[Fact, list[frozenset[Fact]]] = {}
    for s in forbidden:
        for f in s:
            touching.setdefault(f, []).append(s)

    blocks = dict(db.block_index)
    chosen: dict = {}
    chosen_facts: set[Fact] = set()
    nodes = 0

    def allowed(bid) -> list[Fact]:
        return [f for f in blocks[bid]
                if not any(s - {f} <= chosen_facts for s in touching.get(f, ()))]

    def search() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > limit:
            raise LimitExceeded(f"search exceeded {limit} nodes")
        open_blocks = [bid for bid in blocks if bid not in chosen]
        if not open_blocks:
            return True
        options = {bid: allowed(bid) for bid in open_blocks}
        bid = min(open_blocks, key=lambda b: len(options[b]))
        for f in options[bid]:
            chosen[bid] = f
            chosen_facts.add(f)
            if search():
                return True
            del chosen[bid]
            chosen_facts.discard(f)
        return False

    return Repair(chosen) if search() else None


def certain(db: Database, q: ConjunctiveQuery, limit: int = DEFAULT_REPAIR_LIMIT) -> bool:
    """True iff every repair of ``db`` satisfies ``q``."""
    return counterexample_repair(db, q, limit) is None


def minimal_repairs(db: Database, q: ConjunctiveQuery,
                    limit: int = DEFAULT_REPAIR_LIMIT) -> set[Repair]:
    """Repairs with the fewest solutions to ``q``."""
    best: set[Repair] = set()
    best_count: int | None = None
    for r in repairs(db, limit):
        n = len(solutions(r.facts, q))
        if best_count is None or n < best_count:
            best, best_count = {r}, n
        elif n == best_count:
            best.add(r)
    return best
