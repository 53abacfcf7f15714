"""Certain answers of conjunctive queries over databases violating primary keys."""

from .core import (Atom, ConjunctiveQuery, Database, Fact, Repair, RelationSchema, Schema,
                   count_repairs, fact, parse_database, parse_query, path_query,
                   render_database, repairs, satisfies, solutions)
from .errors import (CQAError, InvariantViolation, LimitExceeded, ParseError,
                     QueryShapeError, SchemaError)
from .fixpoint import DeltaTable, FixpointResult, Mode, replay, run_cqk, run_cqk_plus, trace
from .generators import DnInstance, Profile, gen_dn, gen_random, q4_to_q5
from .matching import (BipartiteInstance, SolutionGraph, build_solution_graph, certain_q4,
                       hopcroft_karp, sbm_to_q4)
from .oracle import certain, counterexample_repair
from .path import (PathAutomaton, build_automaton, counterexample_word, factor_condition,
                   prefix_condition, run_n_fixpoint)
from .queries import CATALOG, Q1, Q2, Q2_PATH, Q3, Q3_PATH, Q4, Q5
from .sjf import AttackGraph, Classification, Verdict, build_attack_graph, classify

__all__ = [name for name in dir() if not name.startswith("_")]
