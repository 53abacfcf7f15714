import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from cqa.core import Database, Schema, fact, parse_database, repairs, satisfies
from cqa.errors import LimitExceeded, QueryShapeError
from cqa.fixpoint import (Mode, replay, run_cqk, run_cqk_plus, trace, trace_jsonl,
                          trace_records)
from cqa.generators import gen_dn
from cqa.oracle import certain
from cqa.queries import Q1, Q2, Q2_PATH, Q3, Q4, Q5

from helpers import QUERIES, random_db

Q2_DB = "R1(a; b)\nR2(b; a)\nR2(b; c)"
TWO_ATOM = ["q1", "q2", "q3", "q4", "q5"]


def kset(*texts):
    return frozenset(texts)


def rendered(table):
    return {frozenset(str(f) for f in s): r for s, r in table.entries().items()}


# worked examples ----------------------------------------------------------------

def test_consistent_q1_accepts_within_two_rounds():
    res = run_cqk(parse_database("R1(a; b)\nR2(b; c)"), Q1, 2)
    assert res.accepted and res.empty_set_round <= 2


def test_q2_example_table():
    db = parse_database(Q2_DB)
    res = run_cqk(db, Q2, 2)
    assert not res.accepted and res.empty_set_round is None
    table = rendered(res.table)
    assert table[kset("R1(a, b)", "R2(b, a)")] == 0
    assert table[kset("R2(b, a)")] == 1
    assert kset("R2(b, c)") not in table and frozenset() not in table


def test_q2_example_trace_names_r1_block():
    res = run_cqk(parse_database(Q2_DB), Q2, 2)
    singles = [d for d in trace(res.table)[1] if len(d.kset) == 1]
    assert [d.witness.label(res.table.db) for d in singles] == ["R1(a; *)"]


def test_d4_rejected_by_both_fixpoints():
    db = gen_dn(4)
    assert not run_cqk_plus(db, Q4, 2).accepted
    assert not run_cqk(db, Q4, 2).accepted


def test_single_self_loop_accepted_by_extended():
    db = Database(Schema().declare("R", 3, [1]), [fact("R", "a", "a", "a")])
    res = run_cqk_plus(db, Q4, 2)
    assert res.accepted and res.empty_set_round <= 1


def test_extended_rule_needs_two_atoms():
    db = parse_database("R(x1; x2)")
    with pytest.raises(QueryShapeError):
        run_cqk_plus(db, Q2_PATH)


def test_cap_exceeded():
    with pytest.raises(LimitExceeded):
        run_cqk(gen_dn(5), Q4, 3, max_ksets=100)


def test_k_defaults_to_atom_count():
    assert run_cqk(parse_database(Q2_DB), Q2).table.k == 2


def test_unknown_strategy():
    with pytest.raises(ValueError):
        run_cqk(parse_database(Q2_DB), Q2, strategy="fast")


# round 0 is literal ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(8))
def test_round_zero_is_every_satisfying_kset(seed):
    q = QUERIES[TWO_ATOM[seed % 5]]
    db = random_db(q, seed, n_blocks=4)
    table = run_cqk(db, q, 3, strategy="naive").table
    expected = {frozenset(c) for r in range(4) for c in itertools.combinations(db.facts, r)
                if satisfies(c, q)}
    assert table.at_round(0) == expected


# strategies and traces -----------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(TWO_ATOM), st.integers(1, 3),
       st.booleans())
def test_frontier_matches_naive(seed, name, k, extended):
    q = QUERIES[name]
    db = random_db(q, seed, n_blocks=4)
    run = run_cqk_plus if extended else run_cqk
    fast, slow = run(db, q, k), run(db, q, k, strategy="naive")
    assert fast.table.entries() == slow.table.entries()
    assert fast.accepted == slow.accepted
    assert fast.empty_set_round == slow.empty_set_round


@pytest.mark.parametrize("seed", range(12))
def test_replay_reproduces_stamps(seed):
    q = QUERIES[TWO_ATOM[seed % 5]]
    db = random_db(q, seed, n_blocks=5)
    mode = Mode.EXTENDED if seed % 2 else Mode.STANDARD
    run = run_cqk_plus if mode is Mode.EXTENDED else run_cqk
    table = run(db, q).table
    records = [json.loads(line) for line in trace_jsonl(table).splitlines()]
    assert records == trace_records(table)
    again = replay(db, q, records, table.k, mode)
    assert again.entries() == table.entries()


def test_replay_rejects_bogus_record():
    db = parse_database(Q2_DB)
    records = trace_records(run_cqk(db, Q2, 2).table)
    records.append({"round": 1, "kset": ["R2(b; c)"],
                    "witness": {"type": "block", "id": "R1(a; *)"}})
    with pytest.raises(ValueError):
        replay(db, Q2, records, 2)


def test_trace_record_shape():
    records = trace_records(run_cqk(parse_database(Q2_DB), Q2, 2).table)
    assert records[0] == {"round": 0, "kset": ["R1(a; b)", "R2(b; a)"], "witness": None}
    assert {"round": 1, "kset": ["R2(b; a)"],
            "witness": {"type": "block", "id": "R1(a; *)"}} in records


# invariants ----------------------------------------------------------------------

@pytest.mark.parametrize("name", TWO_ATOM)
def test_every_derived_set_forces_the_query(name):
    q = QUERIES[name]
    for seed in range(10):
        db = random_db(q, seed, n_blocks=5)
        for run in (run_cqk, run_cqk_plus):
            basis = run(db, q).table.basis()
            for r in repairs(db):
                for s in basis:
                    if s <= r.facts:
                        assert satisfies(r.facts, q)


@pytest.mark.parametrize("name", sorted(QUERIES))
def test_accepted_implies_certain(name):
    q = QUERIES[name]
    for seed in range(12):
        db = random_db(q, seed, n_blocks=5)
        if run_cqk(db, q).accepted:
            assert certain(db, q)


@pytest.mark.parametrize("name", TWO_ATOM)
def test_monotone_in_k(name):
    q = QUERIES[name]
    for seed in range(12):
        db = random_db(q, seed, n_blocks=5)
        answers = [run_cqk(db, q, k).accepted for k in (1, 2, 3)]
        assert answers == sorted(answers)


@pytest.mark.parametrize("name", TWO_ATOM)
def test_standard_table_inside_extended(name):
    q = QUERIES[name]
    for seed in range(10):
        db = random_db(q, seed, n_blocks=4)
        plain = run_cqk(db, q, 2).table.entries()
        ext = run_cqk_plus(db, q, 2).table.entries()
        assert all(s in ext and ext[s] <= r for s, r in plain.items())


@pytest.mark.parametrize("name", TWO_ATOM)
def test_empty_set_iff_some_block_of_singletons(name):
    q = QUERIES[name]
    for seed in range(15):
        db = random_db(q, seed, n_blocks=5)
        table = run_cqk(db, q).table
        by_block = any(all(frozenset([u]) in table for u in block) for block in db.blocks)
        assert table.accepted == by_block


def test_rounds_within_kset_count():
    for seed in range(10):
        db = random_db(Q3, seed, n_blocks=5)
        table = run_cqk(db, Q3).table
        n = len(db)
        assert table.rounds <= sum(1 for r in range(3) for _ in itertools.combinations(range(n), r))


def test_q5_transfer_of_d4_rejected_at_two():
    from cqa.generators import q4_to_q5
    dp = q4_to_q5(gen_dn(4))
    assert not run_cqk(dp, Q5, 2).accepted
