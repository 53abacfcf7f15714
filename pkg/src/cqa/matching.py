"""Certainty of ``R(x; y, z) & R(z; x, y)`` via saturating bipartite matching.

For this query a fact ``a = R(x; y, z)`` forms a solution ``(a, b)`` exactly
when ``b = R(z; x, y)``, so every fact has at most one successor and one
predecessor, and the undirected solution graph splits into triangles, edges
and isolated vertices.  After discarding self-loop facts from non-singleton
blocks, the query is certain iff the bipartite graph blocks -> components has
no matching covering every block.  The reverse direction builds, from any
bipartite graph, a database in which a left-saturating matching exists iff the
query is not certain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching

from .core import Database, Fact, Repair, Schema, solutions
from .errors import InvariantViolation, ParseError, SchemaError
from .queries import Q4

Q4_SCHEMA = Schema().declare("R", 3, [1])


def _check_q4_schema(db: Database) -> None:
    if set(db.schema) - {"R"} or ("R" in db.schema and db.schema["R"] != Q4_SCHEMA["R"]):
        raise SchemaError(f"expected the single relation R/3 key 1, got {db.schema!r}")


@dataclass
class SolutionGraph:
    vertices: tuple[Fact, ...]
    edges: frozenset[frozenset[Fact]]
    self_loops: frozenset[Fact]
    arcs: frozenset[tuple[Fact, Fact]]  # ordered solutions (a, b), a != b

    def neighbours(self, a: Fact) -> set[Fact]:
        return {b for e in self.edges if a in e for b in e if b != a}

    def components(self) -> list[tuple[Fact, ...]]:
        """Connected components, each sorted, listed by smallest fact."""
        idx = {v: i for i, v in enumerate(self.vertices)}
        pairs = [tuple(idx[f] for f in e) for e in self.edges]
        adj = coo_matrix((np.ones(len(pairs), dtype=np.int8),
                          ([i for i, _ in pairs], [j for _, j in pairs])),
                         shape=(len(idx), len(idx)))
        _, labels = connected_components(adj, directed=False)
        comps: dict[int, list[Fact]] = {}
        for v, label in zip(self.vertices, labels):
            comps.setdefault(int(label), []).append(v)
        return sorted((tuple(sorted(c)) for c in comps.values()), key=lambda c: c[0])

    def triangles(self) -> list[tuple[Fact, ...]]:
        return [c for c in self.components() if len(c) == 3]

    def check_invariants(self) -> None:
        succ: dict[Fact, Fact] = {}
        pred: dict[Fact, Fact] = {}
        for a, b in self.arcs:
            if succ.setdefault(a, b) != b:
                raise InvariantViolation(f"{a!r} has two successors")
            if pred.setdefault(b, a) != a:
                raise InvariantViolation(f"{b!r} has two predecessors")
        for comp in self.components():
            members = set(comp)
            inner = [e for e in self.edges if e <= members]
            if len(comp) > 3:
                raise InvariantViolation(f"component of size {len(comp)}: {comp!r}")
            if len(inner) != len(comp) * (len(comp) - 1) // 2:
                raise InvariantViolation(f"component {comp!r} is not a clique")
            if len(comp) > 1 and members & self.self_loops:
                raise InvariantViolation(f"self-loop inside clique {comp!r}")


def build_solution_graph(db: Database) -> SolutionGraph:
    _check_q4_schema(db)
    arcs, loops = set(), set()
    for a, b in solutions(db, Q4):
        if a == b:
            loops.add(a)
        else:
            arcs.add((a, b))
    graph = SolutionGraph(db.facts, frozenset(frozenset(p) for p in arcs),
                          frozenset(loops), frozenset(arcs))
    graph.check_invariants()
    return graph


# ---------------------------------------------------------------------------
# bipartite graphs

@dataclass(frozen=True)
class BipartiteInstance:
    left: tuple[Hashable, ...]
    right: tuple[Hashable, ...]
    edges: frozenset[tuple[Hashable, Hashable]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        ls, rs = set(self.left), set(self.right)
        for s, t in self.edges:
            if s not in ls or t not in rs:
                raise ValueError(f"edge ({s}, {t}) has an endpoint outside the graph")

    def neighbours_left(self, s: Hashable) -> list[Hashable]:
        return [t for t in self.right if (s, t) in self.edges]

    def neighbours_right(self, t: Hashable) -> list[Hashable]:
        return [s for s in self.left if (s, t) in self.edges]


_LABEL = re.compile(r"^[A-Za-z0-9_.\-]+$")


def parse_bipartite(text: str) -> BipartiteInstance:
    """Parse lines ``left s1``, ``right t1`` and ``edge s1 t1`` (``#`` comments)."""
    left: list[str] = []
    right: list[str] = []
    edges: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        kind, args = words[0], words[1:]
        for a in args:
            if not _LABEL.match(a):
                raise ParseError(f"bad vertex label {a!r}", lineno)
        if kind in ("left", "right") and len(args) == 1:
            (left if kind == "left" else right).append(args[0])
        elif kind == "edge" and len(args) == 2:
            edges.add((args[0], args[1]))
        else:
            raise ParseError(f"cannot parse {raw.strip()!r}", lineno)
    for s, t in edges:
        if s not in left or t not in right:
            raise ParseError(f"edge {s} {t} uses an undeclared vertex")
    return BipartiteInstance(tuple(dict.fromkeys(left)), tuple(dict.fromkeys(right)),
                             frozenset(edges))


def render_bipartite(inst: BipartiteInstance) -> str:
    lines = [f"left {s}" for s in inst.left] + [f"right {t}" for t in inst.right]
    lines += [f"edge {s} {t}" for s, t in sorted(inst.edges, key=str)]
    return "\n".join(lines) + "\n"


def _biadjacency(inst: BipartiteInstance) -> csr_matrix:
    li = {s: i for i, s in enumerate(inst.left)}
    ri = {t: i for i, t in enumerate(inst.right)}
    rows = [li[s] for s, _ in inst.edges]
    cols = [ri[t] for _, t in inst.edges]
    return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                      shape=(len(inst.left), len(inst.right)))


def maximum_matching(inst: BipartiteInstance) -> dict[Hashable, Hashable]:
    """A maximum matching as a left -> right dict (Hopcroft-Karp, via scipy)."""
    if not inst.left or not inst.right:
        return {}
    match = maximum_bipartite_matching(_biadjacency(inst), perm_type="column")
    return {inst.left[i]: inst.right[j] for i, j in enumerate(match) if j >= 0}


def hopcroft_karp(inst: BipartiteInstance) -> dict[Hashable, Hashable] | None:
    """A matching covering every left vertex, or None if there is none."""
    m = maximum_matching(inst)
    return m if len(m) == len(inst.left) else None


# ---------------------------------------------------------------------------
# certainty of q4

def drop_self_loops(db: Database) -> Database | None:
    """Remove self-loop facts from non-singleton blocks until none remain.

    Returns None when a self-loop sits alone in its block, in which case every
    repair contains it and the query is certain.
    """
    _check_q4_schema(db)
    while True:
        loops = [a for a in db.facts if (a, a) in solutions([a], Q4)]
        if not loops:
            return db
        if any(len(db.block_of(a)) == 1 for a in loops):
            return None
        db = db.without(loops)


def q4_bipartite(db: Database) -> tuple[BipartiteInstance, list[tuple[Fact, ...]]]:
    """Blocks -> solution-graph components, for a database free of self-loops."""
    comps = build_solution_graph(db).components()
    comp_of = {f: i for i, comp in enumerate(comps) for f in comp}
    left = tuple(db.block_index)
    edges = frozenset((bid, comp_of[f]) for bid, block in db.block_index.items() for f in block)
    return BipartiteInstance(left, tuple(range(len(comps))), edges), comps


def certain_q4(db: Database) -> bool:
    reduced = drop_self_loops(db)
    if reduced is None:
        return True
    inst, _ = q4_bipartite(reduced)
    return hopcroft_karp(inst) is None


def q4_counterexample(db: Database) -> Repair | None:
    """A repair with no q4 solution built from a saturating matching, if one exists."""
    reduced = drop_self_loops(db)
    if reduced is None:
        return None
    inst, comps = q4_bipartite(reduced)
    m = hopcroft_karp(inst)
    if m is None:
        return None
    chosen = {}
    for bid, block in reduced.block_index.items():
        chosen[bid] = next(f for f in block if f in comps[m[bid]])
    return Repair(chosen)


# ---------------------------------------------------------------------------
# bipartite matching -> certainty of q4

@dataclass
class SBMReduction:
    """Outcome of reducing a bipartite graph to a q4 database.

    ``committed`` holds the pairs forced by degree-one right vertices,
    ``owner`` maps every block fact ``b`` of the database to its (left, right)
    edge, and ``unmatchable`` records a left vertex left isolated.
    """

    db: Database
    committed: dict[Hashable, Hashable]
    owner: dict[Fact, tuple[Hashable, Hashable]]
    unmatchable: bool = False

    def decode(self, repair: Repair | Iterable[Fact]) -> dict[Hashable, Hashable]:
        facts = repair.facts if isinstance(repair, Repair) else set(repair)
        matching = dict(self.committed)
        for f in facts:
            if f in self.owner:
                s, t = self.owner[f]
                matching[s] = t
        return matching


def _preprocess(inst: BipartiteInstance):
    left = list(inst.left)
    right = list(inst.right)
    edges = set(inst.edges)
    committed: dict[Hashable, Hashable] = {}
    while True:
        deg_r = {t: [s for s in left if (s, t) in edges] for t in right}
        if any(not any((s, t) in edges for t in right) for s in left):
            return None
        isolated = [t for t in right if not deg_r[t]]
        if isolated:
            right = [t for t in right if t not in isolated]
            continue
        forced = next((t for t in right if len(deg_r[t]) == 1), None)
        if forced is None:
            return left, right, edges, committed
        s = deg_r[forced][0]
        committed[s] = forced
        left.remove(s)
        right.remove(forced)
        edges = {(a, b) for a, b in edges if a != s and b != forced}


def _gadget(keys: list[str], e_keys: list[str], filler: str,
            orientation: int) -> tuple[list[tuple[str, str, str]], list[tuple[str, str, str]]]:
    """Facts tying the blocks keyed ``keys`` so that at most one may be chosen.

    Returns (one fact per key in order, auxiliary facts of the E-blocks).
    """
    n = len(keys)
    a = [None] + keys  # 1-based, as in the chain construction
    e = [None] + e_keys
    if n == 2:
        return [(a[1], filler, a[2]), (a[2], a[1], filler)], []
    if n == 3:
        x, y, z = (a[1], a[2], a[3]) if orientation == 0 else (a[1], a[3], a[2])
        by_key = {x: (x, y, z), z: (z, x, y), y: (y, z, x)}
        return [by_key[k] for k in keys], []
    b = {1: (a[1], a[2], e[1]), 2: (a[2], e[1], a[1]),
         n - 1: (a[n - 1], e[n - 3], a[n]), n: (a[n], a[n - 1], e[n - 3])}
    for i in range(3, n - 1):
        b[i] = (a[i], e[i - 2], e[i - 1])
    aux = [(e[1], a[1], a[2]), (e[n - 3], a[n], a[n - 1])]
    for m in range(1, n - 3):
        aux.append((e[m], e[m + 1], a[m + 2]))       # v_m
        aux.append((e[m + 1], a[m + 2], e[m]))       # u_{m+1}
    return [b[i] for i in range(1, n + 1)], aux


def reduce_sbm(inst: BipartiteInstance) -> SBMReduction:
    """Build the q4 database for ``inst`` (after forced-pair preprocessing)."""
    pre = _preprocess(inst)
    if pre is None:
        loop = Fact("R", ("loop", "loop", "loop"))
        return SBMReduction(Database(Q4_SCHEMA, [loop]), {}, {}, unmatchable=True)
    left, right, edges, committed = pre
    owner: dict[Fact, tuple[Hashable, Hashable]] = {}
    facts: list[Fact] = []
    used_triangles: set[frozenset] = set()
    key = {s: f"a_{s}" for s in left}
    for t in right:
        nbrs = [s for s in left if (s, t) in edges]
        keys = [key[s] for s in nbrs]
        e_keys = [f"e_{t}_{m}" for m in range(1, len(nbrs) - 2)]
        orientation = 0
        if len(nbrs) == 3:
            triples = [frozenset(_gadget(keys, [], "", o)[0]) for o in (0, 1)]
            free = [o for o in (0, 1) if triples[o] not in used_triangles]
            if free:
                orientation = free[0]
                used_triangles.add(triples[orientation])
            else:
                # both triangles over these three blocks are taken: fall back to
                # one E-block, a triangle and an edge with equivalent semantics
                e1 = f"e_{t}_1"
                b_facts = [(keys[0], keys[1], e1), (keys[1], e1, keys[0]),
                           (keys[2], f"c_{t}", e1)]
                aux = [(e1, keys[0], keys[1]), (e1, keys[2], f"c_{t}")]
                _emit(facts, owner, nbrs, t, b_facts, aux)
                continue
        b_facts, aux = _gadget(keys, e_keys, f"c_{t}", orientation)
        _emit(facts, owner, nbrs, t, b_facts, aux)
    return SBMReduction(Database(Q4_SCHEMA, facts), committed, owner)


def _emit(facts, owner, nbrs, t, b_facts, aux) -> None:
    for s, args in zip(nbrs, b_facts):
        f = Fact("R", args)
        owner[f] = (s, t)
        facts.append(f)
    facts.extend(Fact("R", args) for args in aux)


def sbm_to_q4(inst: BipartiteInstance) -> Database:
    """A database where a left-saturating matching of ``inst`` exists iff q4 is not certain."""
    return reduce_sbm(inst).db


def is_saturating_matching(inst: BipartiteInstance, m: Mapping[Hashable, Hashable]) -> bool:
    return (set(m) == set(inst.left)
            and len(set(m.values())) == len(m)
            and all((s, t) in inst.edges for s, t in m.items()))
