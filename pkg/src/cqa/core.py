"""Facts, blocks, repairs and Boolean conjunctive queries under primary keys.

Two small text formats are supported.  A database file holds schema lines
``R/3 key 1`` and fact lines ``R(a; b, c)``, where the constants left of the
semicolon fill the key positions (in declared order) and the remaining
constants fill the other positions in ascending order.  A query is a list of
atoms joined by ``&`` using the same semicolon convention, e.g.
``R1(x; y) & R2(y; z)``.
"""

from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import LimitExceeded, ParseError, QueryShapeError, SchemaError

DEFAULT_REPAIR_LIMIT = 10**6

BlockId = tuple[str, tuple[str, ...]]


class DuplicateFactWarning(UserWarning):
    """A fact line repeated an already-seen fact and was merged."""


@dataclass(frozen=True)
class RelationSchema:
    arity: int
    key_positions: tuple[int, ...]  # 1-based, in declared order

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise SchemaError(f"arity must be positive, got {self.arity}")
        if len(set(self.key_positions)) != len(self.key_positions):
            raise SchemaError(f"repeated key position in {self.key_positions}")
        for p in self.key_positions:
            if not 1 <= p <= self.arity:
                raise SchemaError(f"key position {p} outside [1, {self.arity}]")

    @property
    def key_indices(self) -> tuple[int, ...]:
        return tuple(p - 1 for p in self.key_positions)

    @property
    def nonkey_indices(self) -> tuple[int, ...]:
        keys = set(self.key_indices)
        return tuple(i for i in range(self.arity) if i not in keys)

    def describe(self, name: str) -> str:
        return f"{name}/{self.arity} key {','.join(map(str, self.key_positions))}".rstrip()


class Schema(Mapping[str, RelationSchema]):
    """Relation name -> (arity, primary key).  Exactly one key per relation."""

    def __init__(self, relations: Mapping[str, RelationSchema] | None = None):
        self._relations = dict(relations or {})

    def __getitem__(self, name: str) -> RelationSchema:
        return self._relations[name]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._relations))

    def __len__(self) -> int:
        return len(self._relations)

    def __hash__(self) -> int:
        return hash(frozenset(self._relations.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Schema):
            return self._relations == other._relations
        return NotImplemented

    def __repr__(self) -> str:
        return f"Schema({', '.join(self[n].describe(n) for n in self)})"

    def declare(self, name: str, arity: int, key_positions: Sequence[int]) -> Schema:
        """Return a schema extended with ``name``; redeclaring differently is an error."""
        rel = RelationSchema(arity, tuple(key_positions))
        old = self._relations.get(name)
        if old is not None and old != rel:
            raise SchemaError(f"relation {name} redeclared as {rel.describe(name)}, "
                              f"was {old.describe(name)}")
        return Schema({**self._relations, name: rel})

    def merge(self, other: Mapping[str, RelationSchema]) -> Schema:
        merged = self
        for name in other:
            rel = other[name]
            merged = merged.declare(name, rel.arity, rel.key_positions)
        return merged


@dataclass(frozen=True, order=True)
class Fact:
    """A ground atom ``relation(args)``; ordering is relation name, then args."""

    relation: str
    args: tuple[str, ...]

    def __repr__(self) -> str:
        return f"{self.relation}({', '.join(self.args)})"


def fact(relation: str, *args: str) -> Fact:
    return Fact(relation, tuple(args))


class Database:
    """An immutable finite set of facts partitioned into key-equivalence blocks."""

    __slots__ = ("schema", "facts", "_fact_set", "_blocks", "_block_of", "_index")

    def __init__(self, schema: Schema, facts: Iterable[Fact]):
        fact_set = frozenset(facts)
        blocks: dict[BlockId, list[Fact]] = {}
        block_of: dict[Fact, BlockId] = {}
        for f in fact_set:
            if f.relation not in schema:
                raise SchemaError(f"fact {f!r} uses undeclared relation {f.relation}")
            rel = schema[f.relation]
            if len(f.args) != rel.arity:
                raise SchemaError(f"fact {f!r} has arity {len(f.args)}, "
                                  f"{f.relation} is declared with arity {rel.arity}")
            bid = (f.relation, tuple(f.args[i] for i in rel.key_indices))
            blocks.setdefault(bid, []).append(f)
            block_of[f] = bid
        self.schema = schema
        self.facts: tuple[Fact, ...] = tuple(sorted(fact_set))
        self._fact_set = fact_set
        self._blocks = {bid: tuple(sorted(fs)) for bid, fs in sorted(blocks.items())}
        self._block_of = block_of
        self._index = {f: i for i, f in enumerate(self.facts)}

    # container protocol
    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.facts)

    def __contains__(self, f: object) -> bool:
        return f in self._fact_set

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Database):
            return self.schema == other.schema and self._fact_set == other._fact_set
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.schema, self._fact_set))

    def __repr__(self) -> str:
        return f"<Database {len(self.facts)} facts, {len(self._blocks)} blocks>"

    @property
    def block_index(self) -> Mapping[BlockId, tuple[Fact, ...]]:
        return self._blocks

    @property
    def blocks(self) -> tuple[tuple[Fact, ...], ...]:
        return tuple(self._blocks.values())

    def block_id(self, f: Fact) -> BlockId:
        return self._block_of[f]

    def block_of(self, f: Fact) -> tuple[Fact, ...]:
        return self._blocks[self._block_of[f]]

    def index(self, f: Fact) -> int:
        """Position of ``f`` in the canonical fact order."""
        return self._index[f]

    @property
    def adom(self) -> frozenset[str]:
        return frozenset(c for f in self.facts for c in f.args)

    def relation(self, name: str) -> tuple[Fact, ...]:
        return tuple(f for f in self.facts if f.relation == name)

    def is_consistent(self) -> bool:
        return all(len(b) == 1 for b in self._blocks.values())

    def without(self, facts: Iterable[Fact]) -> Database:
        drop = set(facts)
        return Database(self.schema, (f for f in self.facts if f not in drop))

    def with_facts(self, facts: Iterable[Fact]) -> Database:
        return Database(self.schema, itertools.chain(self.facts, facts))

    def is_partial_repair(self, facts: Iterable[Fact]) -> bool:
        """True iff the facts belong to ``self`` and no two share a block."""
        seen: set[BlockId] = set()
        for f in facts:
            if f not in self._fact_set:
                return False
            bid = self._block_of[f]
            if bid in seen:
                return False
            seen.add(bid)
        return True


@dataclass(frozen=True)
class Atom:
    relation: str
    variables: tuple[str, ...]
    key_positions: tuple[int, ...]  # 1-based

    def __post_init__(self) -> None:
        RelationSchema(len(self.variables), self.key_positions)

    @property
    def key(self) -> frozenset[str]:
        return frozenset(self.variables[p - 1] for p in self.key_positions)

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(self.variables)

    def __str__(self) -> str:
        key = set(p - 1 for p in self.key_positions)
        left = [self.variables[p - 1] for p in self.key_positions]
        right = [v for i, v in enumerate(self.variables) if i not in key]
        return _render_terms(self.relation, left, right)


@dataclass(frozen=True)
class ConjunctiveQuery:
    """A Boolean conjunctive query: an ordered tuple of atoms."""

    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise QueryShapeError("a query needs at least one atom")
        seen: dict[str, tuple[int, tuple[int, ...]]] = {}
        for a in self.atoms:
            sig = (len(a.variables), a.key_positions)
            if seen.setdefault(a.relation, sig) != sig:
                raise SchemaError(f"relation {a.relation} used with inconsistent arity or key")

    def __len__(self) -> int:
        return len(self.atoms)

    def __str__(self) -> str:
        return " & ".join(map(str, self.atoms))

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(v for a in self.atoms for v in a.variables)

    @property
    def schema(self) -> Schema:
        return Schema({a.relation: RelationSchema(len(a.variables), a.key_positions)
                       for a in self.atoms})

    def is_self_join_free(self) -> bool:
        names = [a.relation for a in self.atoms]
        return len(set(names)) == len(names)

    def is_path(self) -> bool:
        n = len(self.atoms)
        chain = []
        for i, a in enumerate(self.atoms):
            if len(a.variables) != 2 or a.key_positions != (1,):
                return False
            if i and a.variables[0] != self.atoms[i - 1].variables[1]:
                return False
            chain.append(a.variables[0])
        chain.append(self.atoms[-1].variables[1])
        return len(set(chain)) == n + 1

    def path_word(self) -> tuple[str, ...]:
        if not self.is_path():
            raise QueryShapeError(f"{self} is not a path query")
        return tuple(a.relation for a in self.atoms)


def path_query(word: Sequence[str], var: str = "x") -> ConjunctiveQuery:
    """Build ``R1(x0; x1) & R2(x1; x2) & ...`` from a word of relation names."""
    return ConjunctiveQuery(tuple(Atom(r, (f"{var}{i}", f"{var}{i + 1}"), (1,))
                                  for i, r in enumerate(word)))


# ---------------------------------------------------------------------------
# parsing and rendering

_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_SCHEMA_RE = re.compile(rf"^({_NAME})\s*/\s*(\d+)\s+key\b\s*([0-9,\s]*)$")
_TERM_RE = re.compile(rf"^({_NAME})\s*\((.*)\)$")
_CONST_RE = re.compile(r"^[^\s,;()#&]+$")
_VAR_RE = re.compile(rf"^{_NAME}$")


def _render_terms(relation: str, left: Sequence[str], right: Sequence[str]) -> str:
    if not right:
        return f"{relation}({', '.join(left)})"
    return f"{relation}({', '.join(left)}; {', '.join(right)})"


def _split_terms(body: str, token_re: re.Pattern, what: str,
                 line: int | None) -> tuple[list[str], list[str] | None]:
    """Split ``a, b; c`` into (['a','b'], ['c']); right side is None without ';'."""
    if body.count(";") > 1:
        raise ParseError(f"more than one ';' in {body!r}", line)

    def tokens(part: str) -> list[str]:
        part = part.strip()
        if not part:
            return []
        out = [t.strip() for t in part.split(",")]
        for t in out:
            if not token_re.match(t):
                raise ParseError(f"bad {what} {t!r}", line)
        return out

    if ";" in body:
        left, right = body.split(";")
        return tokens(left), tokens(right)
    return tokens(body), None


def _place(rel: RelationSchema, name: str, left: list[str], right: list[str] | None,
           line: int | None) -> tuple[str, ...]:
    nkeys = len(rel.key_positions)
    if right is None:
        if nkeys != rel.arity:
            raise SchemaError(_at(f"{name} has key {rel.key_positions}; "
                                  f"';' may only be omitted for all-key relations", line))
        right = []
    if len(left) + len(right) != rel.arity:
        raise SchemaError(_at(f"{name} expects arity {rel.arity}, "
                              f"got {len(left) + len(right)}", line))
    if len(left) != nkeys:
        raise SchemaError(_at(f"inconsistent key split for {name}: "
                              f"expected {nkeys} key terms, got {len(left)}", line))
    out: list[str] = [""] * rel.arity
    for i, t in zip(rel.key_indices, left):
        out[i] = t
    for i, t in zip(rel.nonkey_indices, right):
        out[i] = t
    return tuple(out)


def _at(msg: str, line: int | None) -> str:
    return f"line {line}: {msg}" if line is not None else msg


def _infer(schema: Schema, name: str, left: list[str],
           right: list[str] | None) -> Schema:
    if name in schema:
        return schema
    arity = len(left) + len(right or [])
    if arity == 0:
        raise SchemaError(f"relation {name} has no terms")
    return schema.declare(name, arity, range(1, len(left) + 1))


def parse_database(text: str, schema: Schema | None = None) -> Database:
    """Parse the line-oriented database format.

    Relations used without a schema line get their key inferred from the
    first fact seen: the terms before ``;`` become positions ``1..m``.
    """
    schema = schema or Schema()
    facts: list[Fact] = []
    seen: set[Fact] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SCHEMA_RE.match(line)
        if m:
            name, arity, keys = m.group(1), int(m.group(2)), m.group(3)
            positions = [int(p) for p in re.split(r"[,\s]+", keys.strip()) if p]
            try:
                schema = schema.declare(name, arity, positions)
            except SchemaError as exc:
                raise SchemaError(_at(str(exc), lineno)) from None
            continue
        m = _TERM_RE.match(line)
        if not m:
            raise ParseError(f"cannot parse {line!r}", lineno)
        name = m.group(1)
        left, right = _split_terms(m.group(2), _CONST_RE, "constant", lineno)
        schema = _infer(schema, name, left, right)
        f = Fact(name, _place(schema[name], name, left, right, lineno))
        if f in seen:
            warnings.warn(f"line {lineno}: duplicate fact {f!r} merged",
                          DuplicateFactWarning, stacklevel=2)
            continue
        seen.add(f)
        facts.append(f)
    return Database(schema, facts)


def parse_query(text: str, schema: Schema | None = None) -> ConjunctiveQuery:
    """Parse ``R1(x; y) & R2(y; z)``.  ``#`` comments and newlines are allowed."""
    schema = schema or Schema()
    body = " ".join(line.split("#", 1)[0] for line in text.splitlines()).strip()
    if not body:
        raise ParseError("empty query")
    atoms = []
    for part in body.split("&"):
        part = part.strip()
        m = _TERM_RE.match(part)
        if not m:
            raise ParseError(f"cannot parse atom {part!r}")
        name = m.group(1)
        left, right = _split_terms(m.group(2), _VAR_RE, "variable", None)
        schema = _infer(schema, name, left, right)
        rel = schema[name]
        atoms.append(Atom(name, _place(rel, name, left, right, None), rel.key_positions))
    return ConjunctiveQuery(tuple(atoms))


def render_fact(f: Fact, schema: Schema) -> str:
    rel = schema[f.relation]
    return _render_terms(f.relation, [f.args[i] for i in rel.key_indices],
                         [f.args[i] for i in rel.nonkey_indices])


def render_block_id(bid: BlockId) -> str:
    return f"{bid[0]}({', '.join(bid[1])}; *)"


def render_database(db: Database) -> str:
    lines = [db.schema[name].describe(name) for name in db.schema]
    lines += [render_fact(f, db.schema) for f in db.facts]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# query evaluation

Solution = tuple[Fact, ...]


def _facts_by_relation(source: Database | Iterable[Fact]) -> dict[str, list[Fact]]:
    by_rel: dict[str, list[Fact]] = {}
    for f in source:
        by_rel.setdefault(f.relation, []).append(f)
    return by_rel


def _search(by_rel: dict[str, list[Fact]], q: ConjunctiveQuery) -> Iterator[Solution]:
    atoms = q.atoms
    chosen: list[Fact] = []

    def extend(i: int, val: dict[str, str]) -> Iterator[Solution]:
        if i == len(atoms):
            yield tuple(chosen)
            return
        atom = atoms[i]
        for f in by_rel.get(atom.relation, ()):
            if len(f.args) != len(atom.variables):
                continue
            new = dict(val)
            ok = True
            for var, c in zip(atom.variables, f.args):
                if new.setdefault(var, c) != c:
                    ok = False
                    break
            if ok:
                chosen.append(f)
                yield from extend(i + 1, new)
                chosen.pop()

    yield from extend(0, {})


def solutions(source: Database | Iterable[Fact], q: ConjunctiveQuery) -> set[Solution]:
    """All solutions of ``q``: one (not necessarily distinct) fact per atom.

    Distinct valuations that induce the same fact sequence collapse, which is
    immaterial since the sequence determines the valuation on every variable.
    """
    return set(_search(_facts_by_relation(source), q))


def satisfies(source: Database | Iterable[Fact], q: ConjunctiveQuery) -> bool:
    return next(_search(_facts_by_relation(source), q), None) is not None


def check_compatible(db: Database, q: ConjunctiveQuery) -> None:
    """Raise SchemaError if ``q`` uses a relation of ``db`` with another arity or key."""
    for a in q.atoms:
        if a.relation in db.schema:
            rel = db.schema[a.relation]
            if rel.arity != len(a.variables) or rel.key_positions != a.key_positions:
                raise SchemaError(f"atom {a} does not match {rel.describe(a.relation)}")


# ---------------------------------------------------------------------------
# repairs

class Repair:
    """One fact chosen from every block of a database."""

    __slots__ = ("chosen", "facts")

    def __init__(self, chosen: Mapping[BlockId, Fact]):
        self.chosen = dict(chosen)
        self.facts = frozenset(self.chosen.values())

    def __iter__(self) -> Iterator[Fact]:
        return iter(sorted(self.facts))

    def __contains__(self, f: object) -> bool:
        return f in self.facts

    def __len__(self) -> int:
        return len(self.facts)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Repair):
            return self.facts == other.facts
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.facts)

    def __repr__(self) -> str:
        return f"Repair({sorted(self.facts)!r})"


def count_repairs(db: Database) -> int:
    return math.prod(len(b) for b in db.blocks)


def repairs(db: Database, limit: int = DEFAULT_REPAIR_LIMIT) -> Iterator[Repair]:
    """Enumerate every repair in canonical order (blocks and facts sorted)."""
    total = count_repairs(db)
    if total > limit:
        raise LimitExceeded(f"{total} repairs exceed the limit of {limit}")
    ids = list(db.block_index)
    for choice in itertools.product(*db.block_index.values()):
        yield Repair(dict(zip(ids, choice)))
