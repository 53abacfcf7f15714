"""Static analysis of self-join-free queries: key derivations, determinacy,
the attack graph and the resulting complexity verdict."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .core import Atom, ConjunctiveQuery
from .errors import QueryShapeError


def _require_sjf(q: ConjunctiveQuery) -> None:
    if not q.is_self_join_free():
        raise QueryShapeError(f"query is not self-join-free: {q}")


def gamma_derivable(q: ConjunctiveQuery, start: Iterable[str], target: Atom,
                    avoid: Atom | None = None) -> tuple[Atom, ...] | None:
    """A derivation sequence from the variables ``start`` ending in ``target``.

    Each atom in the returned sequence has its key inside ``start`` plus the
    variables of the atoms before it.  ``avoid`` is never used as a step.
    Returns None if no such sequence exists.
    """
    known = set(start)
    seq: list[Atom] = []
    pending = [a for a in q.atoms if a != avoid and a != target]
    while not target.key <= known:
        step = next((a for a in pending if a.key <= known), None)
        if step is None:
            return None
        pending.remove(step)
        seq.append(step)
        known |= step.vars
    return (*seq, target)


def determines(q: ConjunctiveQuery, a: Atom, b: Atom) -> bool:
    """Whether ``b`` is determined by ``a`` (derivable from vars(a))."""
    return gamma_derivable(q, a.vars, b) is not None


def stable_partition_candidates(q: ConjunctiveQuery) -> list[frozenset[Atom]]:
    """Classes of mutually determined atoms, in atom order."""
    _require_sjf(q)
    classes: list[list[Atom]] = []
    for a in q.atoms:
        for cls in classes:
            if determines(q, a, cls[0]) and determines(q, cls[0], a):
                cls.append(a)
                break
        else:
            classes.append([a])
    return [frozenset(c) for c in classes]


def a_plus(q: ConjunctiveQuery, a: Atom) -> frozenset[Atom]:
    """Atoms reachable by derivations from key(a) that never step through ``a``."""
    _require_sjf(q)
    return frozenset(b for b in q.atoms
                     if b != a and gamma_derivable(q, a.key, b, avoid=a) is not None)


def protected_variables(q: ConjunctiveQuery, a: Atom) -> frozenset[str]:
    """Variables an attack from ``a`` may not travel through."""
    out = set(a.key)
    for b in a_plus(q, a):
        out |= b.vars
    return frozenset(out)


def attacked_by(q: ConjunctiveQuery, a: Atom) -> frozenset[Atom]:
    blocked = protected_variables(q, a)
    reached = {a}
    frontier = [a]
    while frontier:
        f = frontier.pop()
        for g in q.atoms:
            if g not in reached and (f.vars & g.vars) - blocked:
                reached.add(g)
                frontier.append(g)
    return frozenset(reached - {a})


def attacks(q: ConjunctiveQuery, a: Atom, b: Atom) -> bool:
    _require_sjf(q)
    return a != b and b in attacked_by(q, a)


@dataclass
class AttackGraph:
    query: ConjunctiveQuery
    edges: dict[tuple[Atom, Atom], str] = field(default_factory=dict)  # -> "weak" | "strong"

    @property
    def nodes(self) -> tuple[Atom, ...]:
        return self.query.atoms

    def successors(self, a: Atom) -> list[Atom]:
        return [b for b in self.nodes if (a, b) in self.edges]

    def reaches(self, a: Atom, b: Atom) -> list[Atom] | None:
        """A path a ... b along attacks (a alone when a == b), or None."""
        prev: dict[Atom, Atom | None] = {a: None}
        queue = [a]
        while queue:
            x = queue.pop(0)
            if x == b:
                path = [x]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            for y in self.successors(x):
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        return None

    def strong_cycle(self) -> list[Atom] | None:
        """Atoms of a cycle using at least one strong attack, first atom repeated last."""
        for (a, b), tag in self.edges.items():
            if tag == "strong":
                back = self.reaches(b, a)
                if back is not None:
                    return [a, *back]
        return None

    def sccs(self) -> list[tuple[Atom, ...]]:
        """Strongly connected components in topological order of the attacks."""
        order = list(self.nodes)
        comps: list[list[Atom]] = []
        assigned: set[Atom] = set()
        for a in order:
            if a in assigned:
                continue
            comp = [b for b in order if b not in assigned
                    and self.reaches(a, b) is not None and self.reaches(b, a) is not None]
            assigned.update(comp)
            comps.append(comp)
        # repeatedly emit a component no remaining component attacks
        out: list[tuple[Atom, ...]] = []
        rest = comps[:]
        while rest:
            for c in rest:
                if not any((x, y) in self.edges for d in rest if d is not c for x in d for y in c):
                    out.append(tuple(c))
                    rest.remove(c)
                    break
        return out

    def is_acyclic(self) -> bool:
        return all(len(c) == 1 for c in self.sccs())

    def to_dot(self) -> str:
        lines = ["digraph attacks {"]
        for i, a in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{a}"];')
        idx = {a: i for i, a in enumerate(self.nodes)}
        for (a, b), tag in self.edges.items():
            style = "dashed" if tag == "weak" else "solid"
            lines.append(f'  n{idx[a]} -> n{idx[b]} [label="{tag}", style={style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_attack_graph(q: ConjunctiveQuery) -> AttackGraph:
    _require_sjf(q)
    g = AttackGraph(q)
    for a in q.atoms:
        for b in sorted(attacked_by(q, a), key=q.atoms.index):
            g.edges[(a, b)] = "weak" if determines(q, a, b) else "strong"
    return g


class Verdict(str, enum.Enum):
    FO = "FO"
    PTIME_NOT_FO = "PTIME_NOT_FO"
    CONP_COMPLETE = "CONP_COMPLETE"


@dataclass
class Classification:
    """``witness`` is a sequence of atom groups for FO and PTIME_NOT_FO (a
    topological order of the attack graph's components) and the atoms of a
    cycle for CONP_COMPLETE."""

    verdict: Verdict
    witness: list
    graph: AttackGraph

    def to_dict(self) -> dict:
        if self.verdict is Verdict.CONP_COMPLETE:
            witness = {"strong_cycle": [str(a) for a in self.witness]}
        else:
            witness = {"sequence": [[str(a) for a in group] for group in self.witness]}
        edges = [{"from": str(a), "to": str(b), "kind": tag}
                 for (a, b), tag in self.graph.edges.items()]
        return {"verdict": self.verdict.value, "witness": witness, "attacks": edges}


def classify(q: ConjunctiveQuery) -> Classification:
    g = build_attack_graph(q)
    cycle = g.strong_cycle()
    if cycle is not None:
        return Classification(Verdict.CONP_COMPLETE, cycle, g)
    comps = g.sccs()
    verdict = Verdict.FO if all(len(c) == 1 for c in comps) else Verdict.PTIME_NOT_FO
    return Classification(verdict, [list(c) for c in comps], g)
