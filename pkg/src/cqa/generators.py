"""Instance families: the Dn lower-bound databases, the q4 -> q5 transfer, and
seeded random databases for property tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import ConjunctiveQuery, Database, Fact, Schema, solutions
from .errors import SchemaError
from .matching import Q4_SCHEMA, build_solution_graph
from .queries import Q4

Q5_SCHEMA = Schema().declare("R1", 2, [1]).declare("S1", 3, [1, 2])


# ---------------------------------------------------------------------------
# Dn

@dataclass(frozen=True)
class DnInstance:
    """``gen_dn(n)`` together with names for its facts.

    ``b[(j, i)]`` is the j-th fact of block B_i; ``u[(j, l)]`` and ``v[(j, l)]``
    are the two facts of block E^j_l.
    """

    n: int
    db: Database
    b: dict[tuple[int, int], Fact]
    u: dict[tuple[int, int], Fact]
    v: dict[tuple[int, int], Fact]

    def b_block(self, i: int) -> tuple[Fact, ...]:
        return tuple(self.b[(j, i)] for j in range(1, self.n))

    def e_block(self, j: int, l: int) -> tuple[Fact, ...]:
        return (self.u[(j, l)], self.v[(j, l)])

    def name(self, f: Fact) -> str:
        for label, table in (("b", self.b), ("u", self.u), ("v", self.v)):
            for (j, i), g in table.items():
                if g == f:
                    return f"{label}^{j}_{i}"
        raise KeyError(f)

    def triangles(self) -> list[frozenset[Fact]]:
        """The triangles the construction is designed to produce."""
        n, out = self.n, []
        for j in range(1, n):
            out.append(frozenset({self.b[(j, 1)], self.b[(j, 2)], self.u[(j, 1)]}))
            out.append(frozenset({self.b[(j, n - 1)], self.b[(j, n)], self.v[(j, n - 3)]}))
            for l in range(1, n - 3):
                out.append(frozenset({self.v[(j, l)], self.u[(j, l + 1)], self.b[(j, l + 2)]}))
        return out


def dn_instance(n: int) -> DnInstance:
    if n < 4:
        raise ValueError(f"Dn needs n >= 4, got {n}")
    a = {i: f"a_{i}" for i in range(1, n + 1)}
    b, u, v = {}, {}, {}
    for j in range(1, n):
        e = {l: f"e_{j}_{l}" for l in range(1, n - 2)}
        b[(j, 1)] = (a[1], a[2], e[1])
        b[(j, 2)] = (a[2], e[1], a[1])
        for i in range(3, n - 1):
            b[(j, i)] = (a[i], e[i - 2], e[i - 1])
        b[(j, n - 1)] = (a[n - 1], e[n - 3], a[n])
        b[(j, n)] = (a[n], a[n - 1], e[n - 3])
        u[(j, 1)] = (e[1], a[1], a[2])
        v[(j, n - 3)] = (e[n - 3], a[n], a[n - 1])
        for l in range(1, n - 3):
            v[(j, l)] = (e[l], e[l + 1], a[l + 2])
            u[(j, l + 1)] = (e[l + 1], a[l + 2], e[l])
    to_fact = lambda table: {k: Fact("R", args) for k, args in table.items()}
    b, u, v = to_fact(b), to_fact(u), to_fact(v)
    db = Database(Q4_SCHEMA, [*b.values(), *u.values(), *v.values()])
    return DnInstance(n, db, b, u, v)


def gen_dn(n: int) -> Database:
    return dn_instance(n).db


def _check_jl(n: int, j: int, l: int) -> None:
    if n < 4 or not 1 <= j <= n - 1 or not 1 <= l <= n:
        raise ValueError(f"index out of range: n={n}, j={j}, l={l}")


def u_set(inst: DnInstance, j: int, l: int) -> frozenset[Fact]:
    """The E^j facts compatible with b^j_l on the u side."""
    n = inst.n
    _check_jl(n, j, l)
    top = n - 3 if l >= n - 1 else l - 2
    return frozenset(inst.u[(j, k)] for k in range(1, top + 1))


def v_set(inst: DnInstance, j: int, l: int) -> frozenset[Fact]:
    """The E^j facts compatible with b^j_l on the v side."""
    n = inst.n
    _check_jl(n, j, l)
    if l >= n - 1:
        return frozenset()
    start = 1 if l <= 2 else l - 1
    return frozenset(inst.v[(j, k)] for k in range(start, n - 2))


def _e_facts(inst: DnInstance, w: Iterable[Fact], j: int) -> set[Fact]:
    mine = {inst.u[(j, l)] for l in range(1, inst.n - 2)} | {inst.v[(j, l)] for l in range(1, inst.n - 2)}
    return set(w) & mine


def is_k_obstruction(w: Iterable[Fact], inst: DnInstance) -> bool:
    """Whether ``w`` is an obstruction set of Dn.

    Raises ValueError when ``w`` is not a partial repair of ``inst.db``.
    """
    w = set(w)
    if not inst.db.is_partial_repair(w):
        raise ValueError("not a partial repair of Dn")
    index = {f: key for key, f in inst.b.items()}
    picked = [index[f] for f in w if f in index]  # (j, i) pairs
    js = [j for j, _ in picked]
    if len(set(js)) != len(js):
        return False
    for j, i in picked:
        if not _e_facts(inst, w, j) <= u_set(inst, j, i) | v_set(inst, j, i):
            return False
    for j in range(1, inst.n):
        mine = _e_facts(inst, w, j)
        if not any(mine <= u_set(inst, j, l) | v_set(inst, j, l) for l in range(1, inst.n + 1)):
            return False
    return True


def obstruction_for_blocks(inst: DnInstance, blocks: Sequence) -> frozenset[Fact]:
    """An obstruction set choosing one fact in each of ``blocks`` (block ids of Dn).

    Requires at most n-1 B-blocks among ``blocks``.
    """
    db = inst.db
    b_blocks = [bid for bid in blocks if bid[1][0].startswith("a_")]
    if len(b_blocks) > inst.n - 1:
        raise ValueError("more B-blocks than superscripts")
    assigned: dict[int, int] = {}  # j -> i
    w = set()
    for j, bid in enumerate(b_blocks, start=1):
        i = int(bid[1][0].split("_")[1])
        assigned[j] = i
        w.add(inst.b[(j, i)])
    for bid in blocks:
        if bid in b_blocks:
            continue
        u, v = db.block_index[bid]
        allowed = (u_set(inst, j, assigned[j]) | v_set(inst, j, assigned[j])
                   if (j := _superscript(inst, u)) in assigned else v_set(inst, j, 1))
        w.add(u if u in allowed else v)
    return frozenset(w)


def _superscript(inst: DnInstance, f: Fact) -> int:
    for (j, _), g in (*inst.u.items(), *inst.v.items()):
        if g == f:
            return j
    raise KeyError(f)


# ---------------------------------------------------------------------------
# q4 -> q5

def q4_to_q5(db: Database) -> Database:
    """Transfer a q4 database to q5 so that certainty is preserved and the
    k-set fixpoint for q5 accepts only when the extended one accepts for q4."""
    graph = build_solution_graph(db)
    comps = graph.components()
    clique = {f: n for n, comp in enumerate(comps, start=1) for f in comp}
    block_no = {bid: i for i, bid in enumerate(db.block_index, start=1)}
    e = lambda f: f"e_{block_no[db.block_id(f)]}"
    out: set[Fact] = set()
    for f in db.facts:
        out.add(Fact("R1", (e(f), f"f_{clique[f]}")))
    pair_no = 0
    for pair in sorted((tuple(sorted(p)) for p in graph.edges)):
        u, v = pair
        if db.block_id(u) == db.block_id(v):
            continue
        pair_no += 1
        g = f"g_{pair_no}"
        for x in pair:
            out.add(Fact("S1", (f"f_{clique[x]}", g, e(x))))
    for n, u in enumerate(sorted(graph.self_loops), start=1):
        out.add(Fact("S1", (f"f_{clique[u]}", f"h_{n}", e(u))))
    return Database(Q5_SCHEMA, out)


# ---------------------------------------------------------------------------
# random databases

@dataclass(frozen=True)
class Profile:
    """Shape of a random database.

    ``relations`` maps a name to (arity, key positions).  When ``plant`` is
    given, ``n_plant`` solutions of it are inserted before random filling.
    """

    relations: dict[str, tuple[int, tuple[int, ...]]]
    n_blocks: int = 6
    max_block_size: int = 2
    domain_size: int = 4
    seed: int = 0
    plant: ConjunctiveQuery | None = None
    n_plant: int = 0

    def schema(self) -> Schema:
        s = Schema()
        for name, (arity, key) in self.relations.items():
            s = s.declare(name, arity, key)
        return s


def profile_for(q: ConjunctiveQuery, **kwargs) -> Profile:
    rels = {name: (rs.arity, rs.key_positions) for name, rs in q.schema.items()}
    return Profile(rels, **kwargs)


def gen_random(profile: Profile) -> Database:
    if profile.n_blocks < 0 or profile.max_block_size < 1 or profile.domain_size < 1:
        raise ValueError(f"bad profile {profile!r}")
    rng = random.Random(profile.seed)
    schema = profile.schema()
    domain = [f"c{i}" for i in range(profile.domain_size)]
    names = sorted(schema)
    facts: set[Fact] = set()

    for _ in range(profile.n_plant):
        q = profile.plant
        if q is None:
            raise ValueError("n_plant given without plant query")
        if set(q.schema.items()) - set(schema.items()):
            raise SchemaError("planted query does not fit the profile")
        val = {x: rng.choice(domain) for x in sorted(q.variables)}
        facts.update(Fact(a.relation, tuple(val[x] for x in a.variables)) for a in q.atoms)

    def block_id(f: Fact):
        rs = schema[f.relation]
        return f.relation, tuple(f.args[i] for i in rs.key_indices)

    blocks: dict = {}
    for f in sorted(facts):
        blocks.setdefault(block_id(f), set()).add(f)
    attempts = 0
    while len(blocks) < profile.n_blocks and attempts < 50 * profile.n_blocks:
        attempts += 1
        name = rng.choice(names)
        rs = schema[name]
        size = rng.randint(1, profile.max_block_size)
        key = [rng.choice(domain) for _ in rs.key_indices]
        if (name, tuple(key)) in blocks:
            continue  # filling never grows an existing block
        for _ in range(size):
            args = [""] * rs.arity
            for i, c in zip(rs.key_indices, key):
                args[i] = c
            for i in rs.nonkey_indices:
                args[i] = rng.choice(domain)
            f = Fact(name, tuple(args))
            blocks.setdefault(block_id(f), set()).add(f)
    return Database(schema, (f for block in blocks.values() for f in block))


def random_q4_db(seed: int, n_blocks: int = 5, max_block_size: int = 3,
                 domain_size: int = 3) -> Database:
    """Random database over R/3 key 1; a small domain makes self-loops and
    triangles common."""
    return gen_random(Profile({"R": (3, (1,))}, n_blocks, max_block_size, domain_size, seed))


def random_bipartite(seed: int, max_left: int = 8, max_right: int = 8, p: float | None = None):
    from .matching import BipartiteInstance

    rng = random.Random(seed)
    nl, nr = rng.randint(0, max_left), rng.randint(0, max_right)
    density = p if p is not None else rng.uniform(0.1, 0.6)
    left = tuple(f"s{i}" for i in range(1, nl + 1))
    right = tuple(f"t{i}" for i in range(1, nr + 1))
    edges = frozenset((s, t) for s in left for t in right if rng.random() < density)
    return BipartiteInstance(left, right, edges)
