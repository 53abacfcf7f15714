"""Independent reference implementations and instance builders for the tests.

Nothing here reuses the search code under test: solutions are found by trying
every assignment of facts to atoms, and certainty by recursive block choice.
"""

from __future__ import annotations

import random

from cqa.core import ConjunctiveQuery, Database, Fact, path_query
from cqa.generators import gen_random, profile_for
from cqa.queries import Q1, Q2, Q2_PATH, Q3, Q3_PATH, Q4, Q5


def _assignments(facts, q: ConjunctiveQuery):
    """Nested loops over atom-to-fact assignments, abandoning a prefix as soon
    as two atoms disagree on a variable."""
    facts = list(facts)

    def extend(i: int, val: dict[str, str], chosen: tuple[Fact, ...]):
        if i == len(q.atoms):
            yield chosen
            return
        atom = q.atoms[i]
        for f in facts:
            if f.relation != atom.relation or len(f.args) != len(atom.variables):
                continue
            new = dict(val)
            if all(new.setdefault(x, c) == c for x, c in zip(atom.variables, f.args)):
                yield from extend(i + 1, new, chosen + (f,))

    return extend(0, {}, ())


def brute_solutions(facts, q: ConjunctiveQuery) -> set[tuple[Fact, ...]]:
    return set(_assignments(facts, q))


def recursive_certain(db: Database, q: ConjunctiveQuery) -> bool:
    blocks = list(db.blocks)

    def go(i: int, chosen: list[Fact]) -> bool:
        if i == len(blocks):
            return next(_assignments(chosen, q), None) is not None
        return all(go(i + 1, chosen + [f]) for f in blocks[i])

    return go(0, [])


RS = path_query(["R1", "R2"])  # prefix-condition path with distinct letters

QUERIES = {"q1": Q1, "q2": Q2, "q3": Q3, "q4": Q4, "q5": Q5,
           "q2p": Q2_PATH, "q3p": Q3_PATH, "rs": RS}


def random_db(q: ConjunctiveQuery, seed: int, n_blocks: int = 5, max_block_size: int = 2,
              domain_size: int = 3, n_plant: int | None = None) -> Database:
    """Small random database over the schema of ``q``, usually with planted solutions
    so that certain instances occur."""
    plant = seed % 3 if n_plant is None else n_plant
    return gen_random(profile_for(q, n_blocks=n_blocks, max_block_size=max_block_size,
                                  domain_size=domain_size, seed=seed,
                                  plant=q if plant else None, n_plant=plant))


def contested_db(q: ConjunctiveQuery, seed: int, n_blocks: int = 5, max_block_size: int = 3,
                 domain_size: int = 3) -> Database:
    """``random_db`` with extra same-key alternatives added to some blocks, so that
    planted solutions are often contested and non-certain instances are common."""
    db = random_db(q, seed, n_blocks=n_blocks, max_block_size=1, domain_size=domain_size)
    rng = random.Random(-1 - seed)
    values = [f"c{i}" for i in range(domain_size)] + ["fresh"]
    extra = []
    for block in db.blocks:
        f = block[0]
        rs = db.schema[f.relation]
        for _ in range(rng.randint(0, max(0, max_block_size - len(block)))):
            args = list(f.args)
            for i in rs.nonkey_indices:
                args[i] = rng.choice(values)
            extra.append(Fact(f.relation, tuple(args)))
    return db.with_facts(extra)


def injection_exists(left, right, edges) -> bool:
    """Exhaustive search for an injective left -> right map along ``edges``."""
    nbrs = {s: [t for t in right if (s, t) in edges] for s in left}
    order = sorted(left, key=lambda s: len(nbrs[s]))

    def go(i: int, used: frozenset) -> bool:
        if i == len(order):
            return True
        return any(go(i + 1, used | {t}) for t in nbrs[order[i]] if t not in used)

    return go(0, frozenset())
