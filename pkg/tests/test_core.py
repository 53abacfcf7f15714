import warnings

import pytest
from hypothesis import given, settings, strategies as st

from cqa.core import (Database, DuplicateFactWarning, Schema, count_repairs, fact,
                      parse_database, parse_query, render_database, repairs, satisfies,
                      solutions)
from cqa.errors import LimitExceeded, ParseError, QueryShapeError, SchemaError
from cqa.generators import gen_dn
from cqa.queries import Q1, Q4

from helpers import QUERIES, brute_solutions, random_db


# parsing -------------------------------------------------------------------

def test_single_fact_one_block():
    db = parse_database("R/3 key 1\nR(a; b, c)")
    assert len(db) == 1 and len(db.blocks) == 1


def test_shared_key_gives_block_of_two():
    db = parse_database("R(a; b, c)\nR(a; c, b)")
    assert [len(b) for b in db.blocks] == [2]


def test_arity_mismatch_rejected_with_line():
    with pytest.raises((SchemaError, ParseError), match="line 2"):
        parse_database("R/3 key 1\nR(a; b)")


def test_inconsistent_key_split_rejected():
    with pytest.raises((SchemaError, ParseError), match="key split"):
        parse_database("R(a; b, c)\nR(a, b; c)")


def test_syntax_error_has_line_number():
    with pytest.raises(ParseError, match="line 3"):
        parse_database("R(a; b)\n# fine\nR(a b")


def test_comments_and_blank_lines_ignored():
    db = parse_database("# header\n\nR(a; b)  # trailing\n")
    assert db.facts == (fact("R", "a", "b"),)


def test_duplicate_facts_merge_with_warning():
    with pytest.warns(DuplicateFactWarning):
        db = parse_database("R(a; b)\nR(a; b)")
    assert len(db) == 1


def test_non_prefix_key_positions():
    db = parse_database("S/3 key 1,3\nS(a, c; b)\nS(a, c; d)\nS(a, e; b)")
    assert sorted(len(b) for b in db.blocks) == [1, 2]
    assert fact("S", "a", "b", "c") in db


def test_full_key_blocks_are_singletons():
    db = parse_database("T/2 key 1,2\nT(a, b)\nT(a, c)")
    assert db.is_consistent()


def test_redeclaring_schema_differently_fails():
    with pytest.raises(SchemaError):
        parse_database("R/2 key 1\nR/2 key 2")


def test_parse_q1():
    q = parse_query("R1(x; y) & R2(y; z)")
    assert q == Q1 and len(q) == 2 and q.is_self_join_free()
    assert q.atoms[0].key == {"x"}


def test_parse_q4_self_join_not_path():
    assert not Q4.is_self_join_free()
    assert not Q4.is_path()


def test_parse_path_word():
    q = parse_query("R(x0; x1) & X(x1; x2)")
    assert q.is_path() and q.path_word() == ("R", "X")


def test_path_needs_distinct_variables():
    assert not parse_query("R(x; y) & R(y; x)").is_path()


def test_query_arity_must_agree():
    with pytest.raises((SchemaError, ParseError)):
        parse_query("R(x; y) & R(x; y, z)")


def test_empty_query_rejected():
    with pytest.raises((ParseError, QueryShapeError)):
        parse_query("  # nothing ")


@pytest.mark.parametrize("name", sorted(QUERIES))
def test_query_round_trips_through_text(name):
    q = QUERIES[name]
    assert parse_query(str(q)) == q


@pytest.mark.parametrize("seed", range(30))
def test_database_round_trip(seed):
    q = QUERIES[sorted(QUERIES)[seed % len(QUERIES)]]
    db = random_db(q, seed)
    assert parse_database(render_database(db)) == db


# blocks and repairs ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(20))
def test_blocks_partition_facts(seed):
    db = random_db(QUERIES["q5"], seed, n_blocks=6, max_block_size=3)
    flat = [f for b in db.blocks for f in b]
    assert sorted(flat) == list(db.facts)
    for f in db.facts:
        for g in db.facts:
            same = f.relation == g.relation and db.block_id(f) == db.block_id(g)
            assert same == (g in db.block_of(f))


def test_repair_count_is_product():
    db = parse_database("R(a; 1)\nR(a; 2)\nS(b; 1)\nS(b; 2)\nS(b; 3)")
    rs = list(repairs(db))
    assert count_repairs(db) == 6 and len(set(rs)) == 6
    for r in rs:
        for b in db.blocks:
            assert len(set(b) & r.facts) == 1


def test_consistent_db_has_one_repair():
    db = parse_database("R(a; 1)\nS(b; 2)")
    assert len(list(repairs(db))) == 1


def test_d4_has_648_repairs():
    assert count_repairs(gen_dn(4)) == 3**4 * 2**3 == 648


def test_repair_limit():
    db = parse_database("R(a; 1)\nR(a; 2)\nR(b; 1)\nR(b; 2)")
    with pytest.raises(LimitExceeded):
        list(repairs(db, limit=3))


# solutions -----------------------------------------------------------------------

def test_q1_unique_solution():
    db = parse_database("R1(a; b)\nR2(b; c)")
    assert solutions(db, Q1) == {(fact("R1", "a", "b"), fact("R2", "b", "c"))}


def test_q4_self_loop_solution():
    u = fact("R", "a", "a", "a")
    db = Database(Schema().declare("R", 3, [1]), [u])
    assert solutions(db, Q4) == {(u, u)}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(sorted(QUERIES)))
def test_solutions_match_assignment_enumeration(seed, name):
    q = QUERIES[name]
    db = random_db(q, seed, n_blocks=3, max_block_size=2)
    if len(db) > 6:
        db = Database(db.schema, db.facts[:6])
    assert solutions(db, q) == brute_solutions(db.facts, q)


@pytest.mark.parametrize("seed", range(15))
def test_repair_solutions_subset_of_database_solutions(seed):
    q = QUERIES["q2"]
    db = random_db(q, seed, n_blocks=4, max_block_size=2)
    every = solutions(db, q)
    for r in repairs(db):
        assert solutions(r.facts, q) <= every
        assert satisfies(r.facts, q) == bool(solutions(r.facts, q))
